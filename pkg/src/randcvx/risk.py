"""Conditional entropic risk measure and its duality checks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fenchel import (
    CheckReport,
    Entropic,
    StratifiedConvexFunction,
    biconjugate,
    conjugate,
    evaluate,
    is_l0_convex_check,
    is_local_check,
    is_proper,
)
from .l0_lattice import RandomScalar
from .prob_core import StratifiedSpace


@dataclass(frozen=True)
class EntropicRiskSpec:
    gamma: float
    space: StratifiedSpace

    def __post_init__(self):
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ValueError("gamma must be a positive finite number")

    def to_json(self) -> dict:
        from .serialization import space_to_json

        return {"gamma": self.gamma, **space_to_json(self.space)}


def entropic_risk(spec: EntropicRiskSpec) -> StratifiedConvexFunction:
    """``rho(x) = log E[exp(-gamma x) | F] / gamma`` as a stratified function."""
    sp = spec.space
    return StratifiedConvexFunction(sp, tuple(Entropic(spec.gamma, sp.conditional_weights(a)) for a in range(sp.n_atoms)))


def _samples(sp: StratifiedSpace, rng, n: int, scale: float = 2.0) -> np.ndarray:
    return rng.normal(scale=scale, size=(n, sp.dim))


def monotonicity_check(rho: StratifiedConvexFunction, n: int = 200, seed: int = 0, tol: float = 1e-12) -> CheckReport:
    """``x <= y`` coordinatewise implies ``rho(x) >= rho(y)``."""
    rng = np.random.default_rng(seed)
    rep = CheckReport("monotonicity")
    for i, x in enumerate(_samples(rho.space, rng, n)):
        y = x + rng.exponential(size=x.size)
        rx, ry = evaluate(rho, x).values, evaluate(rho, y).values
        rep.n_checks += 1
        gap = float(np.max(ry - rx))
        rep.worst_gap = max(rep.worst_gap, gap)
        if gap > tol:
            rep.violations.append({"sample": i, "gap": gap})
    return rep


def cash_invariance_check(rho: StratifiedConvexFunction, n: int = 200, seed: int = 0, tol: float = 1e-12) -> CheckReport:
    """``rho(x + m) = rho(x) - m`` for m constant on each F-atom."""
    sp = rho.space
    rng = np.random.default_rng(seed)
    rep = CheckReport("cash_invariance")
    for i, x in enumerate(_samples(sp, rng, n)):
        m = rng.normal(size=sp.n_atoms)
        lhs = evaluate(rho, x + sp.expand(m)).values
        rhs = evaluate(rho, x).values - m
        rep.n_checks += 1
        gap = float(np.max(np.abs(lhs - rhs)))
        rep.worst_gap = max(rep.worst_gap, gap)
        if gap > tol:
            rep.violations.append({"sample": i, "gap": gap})
    return rep


def axioms_report(spec: EntropicRiskSpec, n: int = 200, seed: int = 0) -> dict:
    rho = entropic_risk(spec)
    proper, _ = is_proper(rho)
    reps = [
        is_local_check(rho, n, seed),
        is_l0_convex_check(rho, n, seed),
        monotonicity_check(rho, n, seed),
        cash_invariance_check(rho, n, seed),
    ]
    out = {r.name: r.to_json() for r in reps}
    out["proper"] = bool(proper)
    out["ok"] = proper and all(r.ok for r in reps)
    return out


def risk_duality_report(spec: EntropicRiskSpec, n_samples: int = 200, seed: int = 0, tol: float = 1e-6) -> dict:
    """Compare ``rho**`` (lazy, by bisection) with ``rho`` and report penalty values."""
    rho = entropic_risk(spec)
    rho2 = biconjugate(rho)
    pen = conjugate(rho)
    sp = spec.space
    rng = np.random.default_rng(seed)
    worst = 0.0
    for x in _samples(sp, rng, n_samples):
        worst = max(worst, float(np.max(np.abs(evaluate(rho2, x).values - evaluate(rho, x).values))))
    penalties = []
    for _ in range(5):
        # one dual point per atom drawn from the negative simplex
        y = np.zeros(sp.dim)
        for a in range(sp.n_atoms):
            y[sp.block(a)] = -rng.dirichlet(np.ones(sp.block(a).size))
        penalties.append({"dual_point": y.tolist(), "penalty": evaluate(pen, y).to_json()})
    return {"gamma": spec.gamma, "n_samples": n_samples, "max_gap": worst, "tol": tol, "ok": worst <= tol, "penalties": penalties}


def worst_case_limit_report(spec: EntropicRiskSpec, n_samples: int = 200, seed: int = 0, tol: float = 1e-2) -> dict:
    """Distance between rho and the atomwise worst case ``max(-x)``.

    The entropic value lies in ``[max(-x) - log(1/pi_min)/gamma, max(-x)]``.
    """
    rho = entropic_risk(spec)
    sp = spec.space
    rng = np.random.default_rng(seed)
    worst = 0.0
    for x in _samples(sp, rng, n_samples):
        wc = np.array([np.max(-x[sp.block(a)]) for a in range(sp.n_atoms)])
        worst = max(worst, float(np.max(np.abs(evaluate(rho, x).values - wc))))
    pimin = min(float(sp.conditional_weights(a).min()) for a in range(sp.n_atoms))
    return {"gamma": spec.gamma, "max_gap": worst, "bound": math.log(1 / pimin) / spec.gamma, "tol": tol, "ok": worst <= tol}


def risk_at(spec: EntropicRiskSpec, x) -> RandomScalar:
    return evaluate(entropic_risk(spec), x)
