"""Adaptive Simpson quadrature, vector-valued so several integrands share one mesh."""

from __future__ import annotations

import numpy as np

from .errors import QuadratureFailure

MAX_PANELS = 2 ** 20


def _simpson(fa, fm, fb, h):
    return (h / 6.0) * (fa + 4.0 * fm + fb)


def simpson_leaves(fun, a: float, b: float, tol: float, max_panels: int = MAX_PANELS):
    """Refine ``[a, b]`` until every panel meets its share of ``tol``.

    ``fun`` maps a scalar to a 1-d array. Returns the accepted panels as
    ``(a, b, integral, panel_tol)`` tuples in increasing order of ``a``. The
    per-panel tolerance halves on each split, so the total absolute error is
    bounded by ``tol`` (up to the usual Richardson heuristics).
    """
    if b <= a:
        return []
    fa, fm, fb = fun(a), fun(0.5 * (a + b)), fun(b)
    stack = [(a, b, fa, fm, fb, _simpson(fa, fm, fb, b - a), tol)]
    leaves = []
    while stack:
        lo, hi, flo, fmid, fhi, whole, ptol = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = fun(lm), fun(rm)
        left = _simpson(flo, flm, fmid, mid - lo)
        right = _simpson(fmid, frm, fhi, hi - mid)
        delta = left + right - whole
        if np.max(np.abs(delta)) <= 15.0 * ptol:
            leaves.append((lo, hi, left + right + delta / 15.0, ptol))
        elif not (lo < lm < mid < rm < hi):
            raise QuadratureFailure(f"panel [{lo}, {hi}] collapsed before meeting tolerance {ptol:.3e}")
        else:
            stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * ptol))
            stack.append((lo, mid, flo, flm, fmid, left, 0.5 * ptol))
        if len(leaves) + len(stack) > max_panels:
            raise QuadratureFailure(f"more than {max_panels} panels needed on [{a}, {b}]")
    leaves.sort(key=lambda leaf: leaf[0])
    return leaves


def adaptive_simpson(fun, a: float, b: float, tol: float = 1e-10, max_panels: int = MAX_PANELS):
    """Integral of ``fun`` over ``[a, b]`` to absolute tolerance ``tol``."""
    if b == a:
        return np.zeros_like(np.atleast_1d(fun(a)), dtype=float)
    if b < a:
        return -adaptive_simpson(fun, b, a, tol, max_panels)
    leaves = simpson_leaves(fun, a, b, tol, max_panels)
    return sum(leaf[2] for leaf in leaves)
