"""Shared conic solve with Clarabel."""

from __future__ import annotations

import warnings


def solve(prob, tol: float = 1e-10) -> None:
    """Solve a cvxpy problem; an inaccurate status is accepted silently.

    Callers either re-evaluate the returned point exactly or only use the
    value as a bound, so a slightly inaccurate solve is harmless.
    """
    import cvxpy as cp

    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="Solution may be inaccurate")
        prob.solve(solver=cp.CLARABEL, tol_gap_abs=tol, tol_gap_rel=tol, tol_feas=tol)
