"""Exception types and the small result record shared by the check routines."""

from __future__ import annotations

from dataclasses import dataclass, field


class GNMajorantError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(GNMajorantError, ValueError):
    pass


class RankDeficient(GNMajorantError, ValueError):
    pass


class OutOfDomain(GNMajorantError, ValueError):
    pass


class HypothesisViolated(GNMajorantError, ValueError):
    pass


class NoNegativeDerivative(GNMajorantError, ValueError):
    pass


class MonotonicityViolated(GNMajorantError, ArithmeticError):
    """The scalar majorant sequence failed to decrease strictly."""


class InvalidParameter(GNMajorantError, ValueError):
    pass


class QuadratureFailure(GNMajorantError, ArithmeticError):
    pass


class NonPositiveL(GNMajorantError, ValueError):
    pass


class OutsideCertifiedBall(GNMajorantError, ValueError):
    pass


class MissingMajorant(GNMajorantError, ValueError):
    pass


class SharpnessNotMet(GNMajorantError, ValueError):
    pass


PASS = "pass"
FAIL = "fail"
HYPOTHESIS_NOT_MET = "hypothesis-not-met"


@dataclass
class CheckResult:
    """Outcome of a sampled or exact inequality check.

    ``lhs``/``rhs`` hold the two sides when the check is a single inequality;
    ``margin`` is ``rhs - lhs`` (or the worst one over a sample).
    """

    status: str
    lhs: float = float("nan")
    rhs: float = float("nan")
    margin: float = float("nan")
    label: str = "exact"
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "label": self.label,
            "detail": self.detail,
        }
