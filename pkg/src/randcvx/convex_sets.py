"""Stratified convex sets: one polyhedron per F-atom.

A set is stored as a product over F-atoms, so it is stable under gluing
along events by construction.  Gauges and distances are computed atom by
atom in closed form or by a small convex program.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._solver import solve
from .l0_lattice import RandomScalar
from .polyhedra import Polyhedron
from .prob_core import Event, StratifiedSpace
from .rlc_module import (
    CondPNorm,
    FiniteSup,
    ModuleElement,
    Seminorm,
    WeightedCoord,
    _coords,
    sup_of,
    unit_ball_rows,
)

INF = math.inf
MEMBER_TOL = 1e-10


class SetError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class StratifiedConvexSet:
    """Product of per-atom polyhedra; ``bodies[a]`` lives in atom a's coordinates."""

    space: StratifiedSpace
    bodies: tuple
    contains_zero: tuple = None
    balanced: tuple = None

    def __post_init__(self):
        if len(self.bodies) != self.space.n_atoms:
            raise SetError("one body per F-atom is required")
        for a, B in enumerate(self.bodies):
            if B.dim != self.space.block(a).size:
                raise SetError(f"body {a} has dimension {B.dim}, atom has {self.space.block(a).size} coordinates")
        if self.contains_zero is None:
            object.__setattr__(self, "contains_zero", tuple(B.contains(np.zeros(B.dim)) for B in self.bodies))
        if self.balanced is None:
            object.__setattr__(self, "balanced", tuple(_is_symmetric(B) for B in self.bodies))

    @classmethod
    def from_v(cls, space, vertices: Sequence) -> "StratifiedConvexSet":
        return cls(space, tuple(Polyhedron.from_v(np.asarray(v, dtype=float).reshape(-1, space.block(a).size)) for a, v in enumerate(vertices)))

    @classmethod
    def from_h(cls, space, forms: Sequence) -> "StratifiedConvexSet":
        return cls(space, tuple(Polyhedron.from_h(A, b, space.block(a).size) for a, (A, b) in enumerate(forms)))

    @property
    def is_nonempty(self) -> bool:
        return all(not B.is_empty for B in self.bodies)

    def body(self, atom: int) -> Polyhedron:
        return self.bodies[atom]

    def contains(self, x) -> bool:
        return contains_event(self, x).is_omega

    def scaled(self, eps) -> "StratifiedConvexSet":
        e = eps.values if isinstance(eps, RandomScalar) else np.broadcast_to(np.asarray(eps, dtype=float), (self.space.n_atoms,))
        return StratifiedConvexSet(self.space, tuple(B.scaled(float(t)) for B, t in zip(self.bodies, e)), self.contains_zero, self.balanced)

    def translated(self, x) -> "StratifiedConvexSet":
        xv = _coords(x)
        return StratifiedConvexSet(self.space, tuple(B.translated(xv[self.space.block(a)]) for a, B in enumerate(self.bodies)))

    def to_json(self) -> dict:
        return {
            "atoms": [{"V": B.points.tolist(), "H": {"A": B.A.tolist(), "b": B.b.tolist()}} for B in self.bodies],
            "contains_zero": list(self.contains_zero),
            "balanced": list(self.balanced),
        }

    @classmethod
    def from_json(cls, data: dict, space: StratifiedSpace) -> "StratifiedConvexSet":
        bodies = []
        for a, item in enumerate(data["atoms"]):
            k = space.block(a).size
            if "H" in item:
                B = Polyhedron.from_h(item["H"]["A"], item["H"]["b"], k)
                if "V" in item:
                    V = Polyhedron.from_v(np.asarray(item["V"], dtype=float).reshape(-1, k))
                    if not _same_body(B, V):
                        raise SetError(f"atom {a}: V-form and H-form disagree")
                    # keep the stored vertices so that save/load is bitwise stable
                    if not B.is_empty:
                        B = Polyhedron(B.A, B.b, V.points.copy(), B.rays, k)
            elif "V" in item:
                B = Polyhedron.from_v(np.asarray(item["V"], dtype=float).reshape(-1, k))
            else:
                raise SetError(f"atom {a}: need a 'V' or 'H' entry")
            bodies.append(B)
        cz = data.get("contains_zero")
        bal = data.get("balanced")
        s = cls(space, tuple(bodies))
        if cz is not None and tuple(cz) != s.contains_zero:
            raise SetError("contains_zero flags do not match the bodies")
        if bal is not None and tuple(bal) != s.balanced:
            raise SetError("balanced flags do not match the bodies")
        return s


def _is_symmetric(B: Polyhedron) -> bool:
    if B.is_empty:
        return False
    if not all(B.contains(-p) for p in B.points):
        return False
    # -r must be a recession direction for every ray r
    return all(np.all(B.A @ (-r) <= 1e-12 * (1 + np.abs(r).max())) for r in B.rays)


def _same_body(B1: Polyhedron, B2: Polyhedron) -> bool:
    if B1.is_empty or B2.is_empty:
        return B1.is_empty == B2.is_empty
    return all(B2.contains(p, 1e-9) for p in B1.points) and all(B1.contains(p, 1e-9) for p in B2.points)


def contains_event(M: StratifiedConvexSet, x) -> Event:
    """Largest event A with ``I_A x in I_A M``: atoms whose block lies in the body."""
    xv = _coords(x)
    sp = M.space
    if xv.size != sp.dim:
        raise ValueError("element length does not match the space")
    return Event.from_mask([M.bodies[a].contains(xv[sp.block(a)], MEMBER_TOL) for a in range(sp.n_atoms)])


# ---------------------------------------------------------------------------
# seminorm balls


def _p_ball_polytopes(p: float, w: np.ndarray, n_dirs: int):
    """Inner and outer polytopes for a weighted p-ball in dimension <= 3."""
    from scipy.spatial import ConvexHull

    k = w.size
    if k == 1:
        pts = np.array([[1.0 / w[0] ** (1 / p)], [-1.0 / w[0] ** (1 / p)]])
        return Polyhedron.from_v(pts), Polyhedron.from_v(pts), 0.0
    if k == 2:
        th = np.linspace(0, 2 * np.pi, n_dirs, endpoint=False)
        dirs = np.c_[np.cos(th), np.sin(th)]
    else:
        i = np.arange(n_dirs) + 0.5
        phi = np.arccos(1 - 2 * i / n_dirs)
        th = np.pi * (1 + 5**0.5) * i
        dirs = np.c_[np.cos(th) * np.sin(phi), np.sin(th) * np.sin(phi), np.cos(phi)]
        if k > 3:
            raise SetError("p-ball approximation is implemented up to 3 coordinates per atom")
    norms = np.sum(w * np.abs(dirs) ** p, axis=1) ** (1 / p)
    pts = dirs / norms[:, None]
    hull = ConvexHull(pts)
    eq = hull.equations  # n.x + off <= 0 inside
    A, b = eq[:, :-1], -eq[:, -1]
    inner = Polyhedron(A, b, pts[hull.vertices], np.zeros((0, k)), k)
    # gauge of the inner polytope on a dense probe of the p-sphere
    m = 8 * n_dirs
    probe = np.random.default_rng(0).normal(size=(m, k))
    probe /= (np.sum(w * np.abs(probe) ** p, axis=1) ** (1 / p))[:, None]
    g = np.max(probe @ A.T / b, axis=1)
    gap = float(max(g.max(), 1.0) - 1.0)
    outer = inner.scaled(1.0 + gap)
    return inner, outer, gap


def ball_of_seminorm(
    s: Seminorm,
    eps,
    space: StratifiedSpace,
    approximate: bool = False,
    side: str = "outer",
    n_dirs: int | None = None,
) -> StratifiedConvexSet:
    """``{x : s(x) <= eps}`` as a stratified polyhedral set.

    Seminorms built from p in {1, inf} and weighted coordinates are exact.
    Other p need ``approximate=True`` and yield the circumscribing
    (``side="outer"``) or inscribed (``side="inner"``) polytope.
    """
    s.validate(space)
    e = eps.values if isinstance(eps, RandomScalar) else np.broadcast_to(np.asarray(eps, dtype=float), (space.n_atoms,))
    if np.any(~(e > 0)) or np.any(~np.isfinite(e)):
        raise SetError("ball radius must be finite and positive on every atom")
    bodies = []
    for a in range(space.n_atoms):
        rows = unit_ball_rows(s, a, space)
        k = space.block(a).size
        if rows is not None:
            A, b = rows
            bodies.append(Polyhedron.from_h(A, b * e[a], k))
            continue
        if not approximate:
            raise SetError("seminorm ball is not polyhedral; pass approximate=True for a polytope pair")
        loc = s.local(a)
        if not isinstance(loc, CondPNorm):
            raise SetError("approximation is only available for a single conditional p-norm")
        nd = n_dirs or {2: 96, 3: 3000}.get(k, 2)
        inner, outer, _ = _p_ball_polytopes(loc.p, space.conditional_weights(a), nd)
        bodies.append((outer if side == "outer" else inner).scaled(float(e[a])))
    return StratifiedConvexSet(space, tuple(bodies))


def p_ball_gap(p: float, w, n_dirs: int) -> float:
    """Relative Hausdorff gap between the inner and outer p-ball polytopes."""
    return _p_ball_polytopes(p, np.asarray(w, dtype=float), n_dirs)[2]


# ---------------------------------------------------------------------------
# gauge


def _check_gauge_flags(U: StratifiedConvexSet):
    if not all(U.contains_zero):
        raise SetError("gauge needs 0 in every atom body")
    if not all(U.balanced):
        raise SetError("gauge needs a balanced set")


def atom_gauge(B: Polyhedron, z) -> float:
    """Minkowski gauge ``min{t >= 0 : z in t B}`` of a polyhedron containing 0.

    With ``B = {a_i . y <= b_i}`` and all ``b_i >= 0`` the gauge is the
    largest ratio ``a_i.z / b_i``; rows with ``b_i = 0`` force ``+inf`` when
    violated.
    """
    z = np.asarray(z, dtype=float)
    if not np.any(z):
        return 0.0
    if B.A.shape[0] == 0:
        return 0.0
    az = B.A @ z
    tol = 1e-12 * (1 + np.abs(z).max())
    flat = B.b <= tol
    if np.any(flat & (az > tol)):
        return INF
    pos = ~flat
    if not np.any(pos):
        return 0.0
    return float(max(0.0, np.max(az[pos] / B.b[pos])))


def gauge(U: StratifiedConvexSet, x) -> RandomScalar:
    """Random gauge: per-atom Minkowski gauge of the balanced body."""
    _check_gauge_flags(U)
    xv = _coords(x)
    sp = U.space
    return RandomScalar([atom_gauge(U.bodies[a], xv[sp.block(a)]) for a in range(sp.n_atoms)])


@dataclass
class SandwichReport:
    n_points: int
    interior_points: int
    strict_points: int
    members: int
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def gauge_sandwich_check(U: StratifiedConvexSet, n_points: int = 1000, seed: int = 0, slack: float = 1e-9) -> SandwichReport:
    """Sample points around U and check interior => gauge<1 => member => gauge<=1."""
    _check_gauge_flags(U)
    sp = U.space
    rng = np.random.default_rng(seed)
    viol = []
    n_int = n_strict = n_mem = 0
    for i in range(n_points):
        x = sample_near(U, rng, spread=2.0, vertex_frac=0.15)
        g = gauge(U, x)
        interior = all(U.bodies[a].interior_contains(x[sp.block(a)], slack) for a in range(sp.n_atoms))
        member = contains_event(U, x).is_omega
        strict = bool(np.all(g.values < 1))
        n_int += interior
        n_strict += strict
        n_mem += member
        if interior and not strict:
            viol.append((i, "interior point with gauge >= 1", x.tolist(), g.to_json()))
        if strict and not member:
            viol.append((i, "gauge < 1 but not a member", x.tolist(), g.to_json()))
        if member and not np.all(g.values <= 1 + 1e-9):
            viol.append((i, "member with gauge > 1", x.tolist(), g.to_json()))
    return SandwichReport(n_points, n_int, n_strict, n_mem, viol)


def sample_near(M: StratifiedConvexSet, rng, spread: float = 1.3, vertex_frac: float = 0.0) -> np.ndarray:
    """Random point: per atom a scaled convex combination of body vertices.

    With probability `vertex_frac` an atom takes a vertex itself, which puts
    the point on the boundary there.
    """
    sp = M.space
    x = np.zeros(sp.dim)
    for a, B in enumerate(M.bodies):
        if len(B.points) and rng.random() < vertex_frac:
            x[sp.block(a)] = B.points[int(rng.integers(len(B.points)))]
            continue
        w = rng.dirichlet(np.ones(len(B.points)))
        p = w @ B.points
        if len(B.rays):
            p = p + rng.exponential(size=len(B.rays)) @ B.rays
        x[sp.block(a)] = p * rng.uniform(0, spread)
    return x


# ---------------------------------------------------------------------------
# distance


def random_distance(x, M: StratifiedConvexSet, P: Sequence[Seminorm]) -> RandomScalar:
    """``d(x, M)`` with respect to the sup of the finite family `P`.

    Distances are monotone in the sub-family, so the supremum over finite
    sub-families is the distance for the full sup.  Atoms where the block
    already lies in the body get exactly 0.
    """
    if not P:
        raise ValueError("seminorm family is empty")
    s = sup_of(list(P))
    s.validate(M.space)
    xv = _coords(x)
    sp = M.space
    inside = contains_event(M, xv)
    out = []
    for a in range(sp.n_atoms):
        B = M.bodies[a]
        if B.is_empty:
            raise SetError(f"atom {a} has an empty body")
        out.append(0.0 if a in inside else atom_distance(s, a, sp, xv[sp.block(a)], B))
    return RandomScalar(out)


def atom_distance(s: Seminorm, atom: int, space: StratifiedSpace, z, B: Polyhedron) -> float:
    """``min { s(z - y) : y in B }`` on one atom."""
    import cvxpy as cp

    z = np.asarray(z, dtype=float)
    if B.contains(z, MEMBER_TOL):
        return 0.0
    y = cp.Variable(z.size)
    cons = [B.A @ y <= B.b] if B.A.shape[0] else []
    prob = cp.Problem(cp.Minimize(s.cvx_expr(z - y, atom, space)), cons)
    solve(prob, 1e-10)
    if y.value is None:
        raise RuntimeError(f"distance program ended with status {prob.status}")
    # evaluate at the projection of the solver's point onto B, which is feasible
    yp = B.project(np.asarray(y.value, dtype=float))
    return float(s.local(atom).atom_value(z - yp, atom, space))


def euclidean_distance(x, M: StratifiedConvexSet) -> RandomScalar:
    xv = _coords(x)
    sp = M.space
    return RandomScalar([M.bodies[a].distance(xv[sp.block(a)]) for a in range(sp.n_atoms)])


# ---------------------------------------------------------------------------
# the positive-minimum set


@dataclass(frozen=True)
class PositiveMinSet:
    """``{x : every coordinate of x is > 0}`` on the given space."""

    space: StratifiedSpace

    def contains(self, x) -> bool:
        return positive_min_membership(x)

    def closure_witness(self, k: int) -> ModuleElement:
        return closure_witness_sequence(k, self.space)


def positive_min_membership(x) -> bool:
    xv = _coords(x)
    return bool(xv.size and np.min(xv) > 0)


def closure_witness_sequence(k: int, space: StratifiedSpace) -> ModuleElement:
    """``y_k = 1/k`` on every coordinate: members converging to the non-member 0."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    return ModuleElement(np.full(space.dim, 1.0 / k))


def is_open_at(x, radius_frac: float = 0.5) -> bool:
    """A box of radius ``radius_frac * min(x)`` around a member stays inside."""
    xv = _coords(x)
    if not positive_min_membership(xv):
        return False
    r = radius_frac * float(np.min(xv))
    return bool(np.min(xv) - r > 0)


__all__ = [
    "StratifiedConvexSet",
    "PositiveMinSet",
    "SetError",
    "contains_event",
    "ball_of_seminorm",
    "p_ball_gap",
    "gauge",
    "atom_gauge",
    "gauge_sandwich_check",
    "SandwichReport",
    "random_distance",
    "atom_distance",
    "euclidean_distance",
    "positive_min_membership",
    "closure_witness_sequence",
    "is_open_at",
    "sample_near",
]
