"""Convex polyhedra in small dimension with both representations.

The H-form is ``A z <= b`` with unit-norm rows; the V-form is a list of
points plus a list of rays (lines are stored as two opposite rays).  The
conversion between the two is delegated to cddlib (double description,
exact rational arithmetic).  Euclidean projection is done exactly by
active-set enumeration, which is cheap in the dimensions used here.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import cdd
import numpy as np

from ._solver import solve

INF = math.inf
FEAS_TOL = 1e-10


def _frac_rows(rows) -> list[list[Fraction]]:
    return [[Fraction(float(v)) for v in r] for r in rows]


def _h_to_v(A: np.ndarray, b: np.ndarray, exact: bool = True):
    """Generators of ``{z : A z <= b}`` as (points, rays)."""
    d = A.shape[1]
    if A.shape[0] == 0:
        rays = np.vstack([np.eye(d), -np.eye(d)]) if d else np.zeros((0, 0))
        return np.zeros((1, d)), rays
    rows = np.hstack([b[:, None], -A])
    mat = cdd.Matrix(_frac_rows(rows) if exact else rows.tolist(), number_type="fraction" if exact else "float")
    mat.rep_type = cdd.RepType.INEQUALITY
    gen = cdd.Polyhedron(mat).get_generators()
    pts, rays = [], []
    for i in range(gen.row_size):
        r = [float(v) for v in gen[i]]
        vec = np.array(r[1:])
        if r[0] != 0:
            pts.append(vec / r[0])
        else:
            rays.append(vec)
            if i in gen.lin_set:
                rays.append(-vec)
    if not pts and not rays:
        return np.zeros((0, d)), np.zeros((0, d))
    if not pts:
        # cdd leaves the origin implicit for cones
        pts.append(np.zeros(d))
    return np.array(pts).reshape(-1, d), np.array(rays).reshape(-1, d)


def _v_to_h(points: np.ndarray, rays: np.ndarray, exact: bool = True):
    """Inequalities ``A z <= b`` describing conv(points) + cone(rays)."""
    d = points.shape[1]
    rows = [[1.0, *p] for p in points] + [[0.0, *r] for r in rays]
    mat = cdd.Matrix(_frac_rows(rows) if exact else rows, number_type="fraction" if exact else "float")
    mat.rep_type = cdd.RepType.GENERATOR
    ineq = cdd.Polyhedron(mat).get_inequalities()
    A, b = [], []
    for i in range(ineq.row_size):
        r = np.array([float(v) for v in ineq[i]])
        # row reads r0 + r[1:] . z >= 0
        a, c = -r[1:], r[0]
        if not np.any(a):
            continue
        A.append(a)
        b.append(c)
        if i in ineq.lin_set:
            A.append(-a)
            b.append(-c)
    if not A:
        return np.zeros((0, d)), np.zeros(0)
    return np.array(A), np.array(b)


def _normalize_rows(A, b):
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).reshape(-1)
    if A.ndim != 2 or A.shape[0] != b.size:
        raise ValueError("H-form needs A of shape (m, d) and b of length m")
    nr = np.linalg.norm(A, axis=1)
    zero = nr == 0
    if np.any(zero & (b < 0)):
        return None  # 0 <= negative: empty
    keep = ~zero
    return A[keep] / nr[keep, None], b[keep] / nr[keep]


class Polyhedron:
    """Closed convex polyhedron ``{z : A z <= b} = conv(points) + cone(rays)``."""

    __slots__ = ("A", "b", "points", "rays", "dim")

    def __init__(self, A, b, points, rays, dim):
        self.A, self.b, self.points, self.rays, self.dim = A, b, points, rays, dim
        for arr in (A, b, points, rays):
            arr.setflags(write=False)

    def __repr__(self):
        return f"Polyhedron(dim={self.dim}, facets={self.A.shape[0]}, points={len(self.points)}, rays={len(self.rays)})"

    @classmethod
    def from_h(cls, A, b, dim: int | None = None) -> "Polyhedron":
        A = np.asarray(A, dtype=float)
        if dim is None:
            dim = A.shape[1]
        A = A.reshape(-1, dim)
        b = np.asarray(b, dtype=float).reshape(-1)
        nb = _normalize_rows(A, b)
        if nb is None:
            return cls.empty(dim)
        # convert the raw rows so that rounding from normalization stays out of the vertices
        keep = np.linalg.norm(A, axis=1) > 0
        pts, rays = _h_to_v(A[keep], b[keep])
        if len(pts) == 0:
            return cls.empty(dim)
        return cls(nb[0], nb[1], pts, rays, dim)

    @classmethod
    def from_v(cls, points, rays=None) -> "Polyhedron":
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2:
            raise ValueError("points must be a 2-d array")
        dim = pts.shape[1]
        rays = np.zeros((0, dim)) if rays is None else np.asarray(rays, dtype=float).reshape(-1, dim)
        if len(pts) == 0:
            return cls.empty(dim)
        A, b = _v_to_h(pts, rays)
        # regenerate a minimal V-form from the facets
        vpts, vrays = _h_to_v(A, b)
        # report vertices with the caller's own coordinates when they match
        for i, v in enumerate(vpts):
            dist = np.abs(pts - v).max(axis=1)
            j = int(np.argmin(dist))
            if dist[j] <= 1e-9 * (1 + np.abs(v).max()):
                vpts[i] = pts[j]
        An, bn = _normalize_rows(A, b)
        return cls(An, bn, vpts, vrays, dim)

    @classmethod
    def empty(cls, dim: int) -> "Polyhedron":
        return cls(np.zeros((1, dim)), np.array([-1.0]), np.zeros((0, dim)), np.zeros((0, dim)), dim)

    @classmethod
    def whole(cls, dim: int) -> "Polyhedron":
        return cls(np.zeros((0, dim)), np.zeros(0), np.zeros((1, dim)), np.vstack([np.eye(dim), -np.eye(dim)]), dim)

    @property
    def is_empty(self) -> bool:
        return len(self.points) == 0

    @property
    def is_bounded(self) -> bool:
        return len(self.rays) == 0

    def _scale(self) -> float:
        s = np.abs(self.b).max() if self.b.size else 0.0
        if len(self.points):
            s = max(s, np.abs(self.points).max())
        return 1.0 + s

    def contains(self, z, tol: float = FEAS_TOL) -> bool:
        if self.is_empty:
            return False
        z = np.asarray(z, dtype=float)
        if self.A.shape[0] == 0:
            return True
        return bool(np.all(self.A @ z <= self.b + tol * self._scale()))

    def interior_contains(self, z, slack: float = 1e-9) -> bool:
        """Strict inequality in every facet row, with the given slack."""
        if self.is_empty:
            return False
        z = np.asarray(z, dtype=float)
        if self.A.shape[0] == 0:
            return True
        return bool(np.all(self.A @ z < self.b - slack))

    def support(self, d) -> float:
        """``sup { d.z : z in P }``; ``-inf`` for the empty set."""
        if self.is_empty:
            return -INF
        d = np.asarray(d, dtype=float)
        if len(self.rays) and np.any(self.rays @ d > 1e-12 * (1 + np.abs(d).max())):
            return INF
        return float(np.max(self.points @ d))

    def support_argmax(self, d) -> np.ndarray:
        return self.points[int(np.argmax(self.points @ np.asarray(d, dtype=float)))]

    def project(self, z) -> np.ndarray:
        """Euclidean projection onto the polyhedron (exact KKT active set)."""
        if self.is_empty:
            raise ValueError("projection onto an empty polyhedron")
        return project_h(self.A, self.b, z, scale=self._scale())

    def distance(self, z) -> float:
        z = np.asarray(z, dtype=float)
        return float(np.linalg.norm(z - self.project(z)))

    def scaled(self, t: float) -> "Polyhedron":
        if t <= 0:
            raise ValueError("scale must be positive")
        return Polyhedron(self.A.copy(), self.b * t, self.points * t, self.rays.copy(), self.dim)

    def translated(self, v) -> "Polyhedron":
        v = np.asarray(v, dtype=float)
        return Polyhedron(self.A.copy(), self.b + self.A @ v, self.points + v, self.rays.copy(), self.dim)

    def intersect(self, other: "Polyhedron") -> "Polyhedron":
        if self.is_empty or other.is_empty:
            return Polyhedron.empty(self.dim)
        return Polyhedron.from_h(np.vstack([self.A, other.A]), np.concatenate([self.b, other.b]), self.dim)


def project_h(A: np.ndarray, b: np.ndarray, z, scale: float = 1.0) -> np.ndarray:
    """Project `z` onto ``{A y <= b}`` by enumerating candidate active sets.

    The projection is characterised by a linearly independent active set S
    with ``y = z - A_S^T lam``, ``A_S y = b_S``, ``lam >= 0`` and ``A y <= b``.
    Sets are tried by increasing size, so the result is the exact KKT point
    up to the rounding of one small linear solve.
    """
    z = np.asarray(z, dtype=float)
    m, d = A.shape
    tol = FEAS_TOL * max(scale, 1.0 + np.abs(z).max())
    if m == 0 or np.all(A @ z <= b + tol):
        return z.copy()
    for r in range(1, min(m, d) + 1):
        for S in itertools.combinations(range(m), r):
            AS = A[list(S)]
            G = AS @ AS.T
            if np.linalg.matrix_rank(G) < r:
                continue
            lam = np.linalg.solve(G, AS @ z - b[list(S)])
            if np.any(lam < -1e-12):
                continue
            y = z - AS.T @ lam
            # KKT holds, and the projection is unique
            if np.all(A @ y <= b + tol):
                return y
    # degenerate geometry: fall back to a numerical QP
    return _project_qp(A, b, z)


def _project_qp(A, b, z):
    import cvxpy as cp

    y = cp.Variable(z.size)
    prob = cp.Problem(cp.Minimize(cp.sum_squares(y - z)), [A @ y <= b])
    solve(prob, 1e-12)
    if y.value is None:
        raise RuntimeError(f"projection QP failed: {prob.status}")
    return np.asarray(y.value, dtype=float)
