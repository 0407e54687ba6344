"""Gauss-Newton for injective-overdetermined zero-residual systems, with
majorant-based local convergence certificates."""

from .errors import CheckResult, GNMajorantError
from .families import (
    IntegrableLMajorant,
    holder_majorant,
    integrable_L_majorant,
    integrable_L_preset,
    linear_majorant,
    lipschitz_majorant,
    smale_majorant,
)
from .majorant import MajorantFunction, RadiusReport, compute_radii, newton_map, run_majorant_sequence
from .problems import ProblemInstance, corpus, get_problem, linear_problem, paper_example
from .solver import IterationTrace, SolveConfig, gauss_newton_solve
from .verify import VerificationReport, cycle_demo, probe_majorant_condition, verify_problem

__all__ = [
    "CheckResult", "GNMajorantError", "IntegrableLMajorant", "IterationTrace", "MajorantFunction",
    "ProblemInstance", "RadiusReport", "SolveConfig", "VerificationReport", "compute_radii", "corpus",
    "cycle_demo", "gauss_newton_solve", "get_problem", "holder_majorant", "integrable_L_majorant",
    "integrable_L_preset", "linear_majorant", "linear_problem", "lipschitz_majorant", "newton_map",
    "paper_example", "probe_majorant_condition", "run_majorant_sequence", "smale_majorant",
    "verify_problem",
]
