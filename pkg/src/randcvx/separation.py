"""Separating a point from a stratified convex set, atom by atom.

On atoms where the point lies outside the body the separating functional
is the Euclidean projection residual; elsewhere it is zero, which gives
equality of both sides there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._solver import solve
from .convex_sets import (
    PositiveMinSet,
    StratifiedConvexSet,
    atom_distance,
    closure_witness_sequence,
    contains_event,
    is_open_at,
    positive_min_membership,
    random_distance,
)
from .l0_lattice import RandomScalar
from .polyhedra import Polyhedron
from .prob_core import Event, StratifiedSpace, uniform_space
from .rlc_module import (
    Concatenated,
    ModuleElement,
    ModuleFunctional,
    Seminorm,
    _as_sup,
    _coords,
    _subsets,
    apply_functional,
)

INF = math.inf


class SeparationError(ValueError):
    """Raised when a separation precondition fails; ``event`` names the atoms."""

    def __init__(self, msg, event: Event | None = None):
        super().__init__(msg)
        self.event = event


@dataclass(frozen=True)
class SeparationCertificate:
    functional: ModuleFunctional
    strict_event: Event
    margin: RandomScalar
    sup_over_M: RandomScalar
    value_at_x: RandomScalar

    def to_json(self) -> dict:
        return {
            "functional": self.functional.to_json(),
            "strict_event": self.strict_event.sorted(),
            "margin": self.margin.to_json(),
            "sup_over_M": self.sup_over_M.to_json(),
            "value_at_x": self.value_at_x.to_json(),
        }


def separate_point_polyhedron(z, B: Polyhedron) -> tuple[np.ndarray, np.ndarray, float]:
    """Direction ``z - proj_B(z)``, the projection, and ``sup_B`` of the direction."""
    if B.is_empty:
        raise SeparationError("empty body")
    p = B.project(z)
    d = np.asarray(z, dtype=float) - p
    return d, p, B.support(d)


def _check_bodies(M: StratifiedConvexSet):
    for a, B in enumerate(M.bodies):
        if B.is_empty:
            raise SeparationError(f"atom {a} has an empty body", Event(frozenset({a}), M.space.n_atoms))


def separate(x, M: StratifiedConvexSet, P: Sequence[Seminorm] = ()) -> SeparationCertificate:
    """Functional f with ``f(x) > sup_M f`` where x is outside M and equality elsewhere.

    The strict event is the set of atoms on which x's block is not in the
    body.  For closed bodies this is exactly where the random distance is
    positive, whatever the seminorm family.
    """
    _check_bodies(M)
    sp = M.space
    xv = _coords(x)
    inside = contains_event(M, xv)
    if inside.is_omega:
        raise SeparationError("x lies in M on every atom", inside)
    strict = inside.complement()
    for s in P:
        s.validate(sp)
    coeffs = np.zeros(sp.dim)
    sup = np.zeros(sp.n_atoms)
    for a in strict:
        blk = sp.block(a)
        d, _, h = separate_point_polyhedron(xv[blk], M.bodies[a])
        coeffs[blk] = d
        sup[a] = h
    f = ModuleFunctional(coeffs)
    fx = apply_functional(f, xv, sp)
    sup_rs = RandomScalar(sup)
    return SeparationCertificate(f, strict, fx - sup_rs, sup_rs, fx)


def separate_strict(x, M: StratifiedConvexSet, P: Sequence[Seminorm] = ()) -> SeparationCertificate:
    """Separation on every atom; x must lie outside the body on each one."""
    _check_bodies(M)
    inside = contains_event(M, x)
    if not inside.is_empty:
        raise SeparationError(f"x lies in M on atoms {inside.sorted()}", inside)
    return separate(x, M, P)


@dataclass(frozen=True)
class NormalizedSeparator:
    functional: ModuleFunctional
    scale: RandomScalar
    xi: RandomScalar
    eta: RandomScalar
    sup_abs_over_M: RandomScalar
    abs_value_at_x: RandomScalar


def _sup_abs(f: ModuleFunctional, M: StratifiedConvexSet) -> np.ndarray:
    sp = M.space
    out = np.zeros(sp.n_atoms)
    for a, B in enumerate(M.bodies):
        c = f.block(a, sp)
        if not np.any(c):
            continue
        out[a] = max(B.support(c), B.support(-c))
    return out


def normalize_separator(cert: SeparationCertificate, M: StratifiedConvexSet, x) -> NormalizedSeparator:
    """Rescale f by ``((xi + eta)/2)^-1`` with ``xi = |f(x)|`` and ``eta = sup_M |f|``.

    Afterwards ``sup_M |f'| <= 1`` on every atom and ``|f'(x)| > 1`` wherever
    the separation was strict.
    """
    if not all(M.balanced):
        raise SeparationError("normalization needs a balanced set")
    if not cert.strict_event.is_omega:
        raise SeparationError("normalization needs strict separation on every atom", cert.strict_event.complement())
    sp = M.space
    f = cert.functional
    xi = np.abs(apply_functional(f, x, sp).values)
    eta = _sup_abs(f, M)
    tot = xi + eta
    if np.any(tot == 0):
        raise SeparationError("degenerate zero functional", Event.from_mask(tot == 0))
    scale = 2.0 / tot
    # rounding may push the bound a hair above 1; step the scale down until it holds
    for a in range(sp.n_atoms):
        while scale[a] * eta[a] > 1.0:
            scale[a] = np.nextafter(scale[a], 0.0)
    g = f.scaled(scale, sp)
    sup_abs = _sup_abs(g, M)
    for a in range(sp.n_atoms):
        while sup_abs[a] > 1.0:
            scale[a] = np.nextafter(scale[a], 0.0)
            g = f.scaled(scale, sp)
            sup_abs = _sup_abs(g, M)
    return NormalizedSeparator(
        g,
        RandomScalar(scale),
        RandomScalar(xi),
        RandomScalar(eta),
        RandomScalar(sup_abs),
        RandomScalar(np.abs(apply_functional(g, x, sp).values)),
    )


# ---------------------------------------------------------------------------
# neighbourhood separation


@dataclass(frozen=True)
class NeighborhoodSeparation:
    """Seminorm and radius: the balls of radius ``epsilon/4`` around x and M do not meet."""

    seminorm: Seminorm
    epsilon: RandomScalar
    choices: tuple = field(default=())


def neighborhood_separation(x, M: StratifiedConvexSet, P: Sequence[Seminorm]) -> NeighborhoodSeparation:
    """Pick per atom a finite sub-family of P that keeps M away from x.

    With ``e = min(1, d(x, M))`` each atom takes the first finite sup Q (by
    size, then index) whose distance exceeds ``e/2``; the atoms are glued
    into one concatenated seminorm.
    """
    if not P:
        raise ValueError("seminorm family is empty")
    _check_bodies(M)
    sp = M.space
    xv = _coords(x)
    Mt = M.translated(-xv)
    zero = np.zeros(sp.dim)
    touch = contains_event(Mt, zero)
    if not touch.is_empty:
        raise SeparationError(f"x lies in M on atoms {touch.sorted()}", touch)
    d = random_distance(zero, Mt, P)
    eps = np.minimum(1.0, d.values)
    choice = {}
    for a in range(sp.n_atoms):
        z = np.zeros(sp.block(a).size)
        for idx in _subsets(P):
            if atom_distance(_as_sup(P, idx), a, sp, z, Mt.bodies[a]) > eps[a] / 2:
                choice[a] = idx
                break
        else:  # pragma: no cover - the full family always qualifies
            raise RuntimeError(f"no sub-family separates on atom {a}")
    groups: dict[tuple, list[int]] = {}
    for a, idx in choice.items():
        groups.setdefault(idx, []).append(a)
    if len(groups) == 1:
        (idx,) = groups
        s = _as_sup(P, idx)
    else:
        events = tuple(Event(frozenset(v), sp.n_atoms) for v in groups.values())
        s = Concatenated(events, tuple(_as_sup(P, idx) for idx in groups))
    return NeighborhoodSeparation(s, RandomScalar(eps), tuple(choice[a] for a in range(sp.n_atoms)))


def neighborhood_gap(x, M: StratifiedConvexSet, s: Seminorm, eps: RandomScalar) -> RandomScalar:
    """Per-atom ``min ||(x + u) - (m + v)||`` over ``m in M`` and ``||u||, ||v|| <= eps/4``.

    Positive values certify that ``x + U`` and ``M + U`` are disjoint.
    """
    import cvxpy as cp

    sp = M.space
    xv = _coords(x)
    out = []
    for a in range(sp.n_atoms):
        B = M.bodies[a]
        k = sp.block(a).size
        z = xv[sp.block(a)]
        r = float(eps.values[a]) / 4
        u, v, m = cp.Variable(k), cp.Variable(k), cp.Variable(k)
        cons = [s.cvx_expr(u, a, sp) <= r, s.cvx_expr(v, a, sp) <= r]
        if B.A.shape[0]:
            cons.append(B.A @ m <= B.b)
        prob = cp.Problem(cp.Minimize(s.cvx_expr(z + u - m - v, a, sp)), cons)
        solve(prob, 1e-11)
        if prob.value is None:
            raise RuntimeError(f"gap program ended with status {prob.status}")
        out.append(float(prob.value))
    return RandomScalar(out)


# ---------------------------------------------------------------------------
# the positive-minimum probe


@dataclass(frozen=True)
class ProbeResult:
    event: Event
    y0: ModuleElement
    report: dict


def magnitude_band(e: float) -> int:
    """Smallest n >= 1 with ``1/n <= e``: band 1 is ``[e >= 1]``, band n is ``[1/n <= e < 1/(n-1)]``.

    Comparisons use the floating-point values of ``1/n``, so ``e = 1/3``
    entered as a float lands in band 3.
    """
    if not e > 0:
        raise ValueError("band needs a positive value")
    if e >= 1:
        return 1
    n = max(1, int(math.ceil(1.0 / e)))
    while n > 1 and 1.0 / (n - 1) <= e:
        n -= 1
    while 1.0 / n > e:
        n += 1
    return n


def counterexample_probe(eps, space: StratifiedSpace | None = None, n_witness: int = 20) -> ProbeResult:
    """Build ``(A_U, y_0)`` for the positive-minimum set and a radius ``eps``.

    The space defaults to n singleton atoms with uniform weights (coarse and
    fine partitions coincide).  ``A_U`` is the first nonempty magnitude band
    of eps and ``y_0`` is 1 off ``A_U`` and ``eps`` on it.
    """
    e = np.asarray(eps.values if isinstance(eps, RandomScalar) else eps, dtype=float)
    if e.ndim != 1 or e.size == 0:
        raise ValueError("eps must be a nonempty vector")
    if np.any(~(e > 0)) or np.any(~np.isfinite(e)):
        raise ValueError("eps must be finite and strictly positive on every atom")
    if space is None:
        space = uniform_space([1] * e.size)
    if space.dim != e.size or space.n_atoms != e.size:
        raise ValueError("the probe runs on a space with one coordinate per F-atom")
    bands = np.array([magnitude_band(float(v)) for v in e])
    first = int(bands.min())
    A = Event.from_mask(bands == first)
    y0 = np.where(A.mask, e, 1.0)
    M = PositiveMinSet(space)

    in_M = positive_min_membership(y0)
    # I_A y0 lies in I_A U: |y0| <= eps on A, checked with exact rationals
    in_U_on_A = all(abs(Fraction(float(y0[j]))) <= Fraction(float(e[j])) for j in A)
    # y0 = y0 + 0 with y0 in M and 0 in U, so I_A y0 is also in I_A (M + U)
    in_M_plus_U = in_M and all(Fraction(0) <= Fraction(float(e[j])) for j in range(e.size))
    witnesses = [closure_witness_sequence(k, space) for k in range(1, n_witness + 1)]
    wit_members = all(M.contains(w) for w in witnesses)
    wit_norms = [float(np.max(np.abs(w.coords))) for w in witnesses]
    wit_bound = all(nrm <= 1.0 / k for k, nrm in enumerate(wit_norms, start=1))
    report = {
        "bands": bands.tolist(),
        "band": first,
        "y0_in_M": bool(in_M),
        "restricted_y0_in_U": bool(in_U_on_A),
        "restricted_y0_in_M_plus_U": bool(in_M_plus_U),
        "intersection_nonempty": bool(in_U_on_A and in_M_plus_U),
        "M_open_at_y0": is_open_at(y0),
        "witnesses_in_M": bool(wit_members),
        "witness_norms_bounded": bool(wit_bound),
        "limit_in_M": positive_min_membership(np.zeros(space.dim)),
    }
    report["M_not_closed"] = report["witnesses_in_M"] and report["witness_norms_bounded"] and not report["limit_in_M"]
    report["ok"] = all(
        report[k]
        for k in ("y0_in_M", "restricted_y0_in_U", "restricted_y0_in_M_plus_U", "intersection_nonempty", "M_open_at_y0", "M_not_closed")
    )
    return ProbeResult(A, ModuleElement(y0), report)
