"""Reference computations that avoid the main code paths.

Each routine is deliberately simple and slow: combinatorial vertex
enumeration instead of double description, LP feasibility instead of
projection, dense sampling instead of closed-form dual norms.  They are
used to freeze test values and to cross-check the library.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import linprog, minimize
from scipy.stats import qmc

INF = math.inf


def vertices_from_h(A, b, tol: float = 1e-9) -> np.ndarray:
    """Vertices of a bounded ``{A z <= b}`` by solving every d-subset of rows."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, d = A.shape
    out = []
    for S in itertools.combinations(range(m), d):
        AS = A[list(S)]
        if abs(np.linalg.det(AS)) < 1e-12:
            continue
        z = np.linalg.solve(AS, b[list(S)])
        if np.all(A @ z <= b + tol * (1 + np.abs(b).max())):
            if not any(np.allclose(z, w, atol=1e-9) for w in out):
                out.append(z)
    return np.array(out).reshape(-1, d)


def support_from_vertices(V, d) -> float:
    V = np.asarray(V, dtype=float)
    if len(V) == 0:
        return -INF
    return float(np.max(V @ np.asarray(d, dtype=float)))


def in_hull_lp(V, z, tol: float = 1e-9) -> bool:
    """Is z a convex combination of the rows of V?  (LP feasibility.)"""
    V = np.asarray(V, dtype=float)
    z = np.asarray(z, dtype=float)
    k = len(V)
    A_eq = np.vstack([V.T, np.ones((1, k))])
    b_eq = np.r_[z, 1.0]
    # minimize the l1 residual so that near-misses are measured rather than infeasible
    n = z.size + 1
    c = np.r_[np.zeros(k), np.ones(2 * n)]
    A = np.hstack([A_eq, np.eye(n), -np.eye(n)])
    res = linprog(c, A_eq=A, b_eq=b_eq, bounds=[(0, None)] * (k + 2 * n), method="highs")
    return bool(res.status == 0 and res.fun <= tol * (1 + np.abs(z).max()))


def hull_distance_slsqp(V, z) -> float:
    """Euclidean distance from z to conv(V) by minimizing over simplex weights."""
    V = np.asarray(V, dtype=float)
    z = np.asarray(z, dtype=float)
    k = len(V)

    def obj(w):
        r = w @ V - z
        return r @ r

    def jac(w):
        return 2 * V @ (w @ V - z)

    cons = [{"type": "eq", "fun": lambda w: w.sum() - 1, "jac": lambda w: np.ones(k)}]
    best = INF
    for start in (np.full(k, 1.0 / k), *np.eye(k)):
        res = minimize(obj, start, jac=jac, bounds=[(0, 1)] * k, constraints=cons, method="SLSQP", options={"ftol": 1e-16, "maxiter": 500})
        best = min(best, float(res.fun))
    return math.sqrt(max(best, 0.0))


def gauge_bisection(A, b, z, hi: float = 1e6, iters: int = 200) -> float:
    """Minkowski gauge of ``{A y <= b}`` (0 inside) by bisection on the scale."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    z = np.asarray(z, dtype=float)

    def inside(t):
        return np.all(A @ z <= t * b + 1e-15)

    if not inside(hi):
        return INF
    lo = 0.0
    if inside(0.0):
        return 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if inside(mid):
            hi = mid
        else:
            lo = mid
    return hi


def sphere_directions(dim: int, n: int = 10_000, seed: int = 0) -> np.ndarray:
    """Low-discrepancy points on the unit sphere (Sobol through the normal map)."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    from scipy.stats import norm

    s = qmc.Sobol(d=dim, scramble=True, seed=seed).random(n)
    g = norm.ppf(np.clip(s, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def dual_norm_sampled(c, norm_fn, n: int = 10_000, seed: int = 0, refine: bool = True, restarts: int = 8) -> tuple[float, np.ndarray]:
    """``sup |c.z| / ||z||`` over a sphere sample, refined by local ascent."""
    c = np.asarray(c, dtype=float)
    dirs = sphere_directions(c.size, n, seed)
    norms = np.array([norm_fn(z) for z in dirs])
    if np.any(norms == 0) and np.any(np.abs(dirs[norms == 0] @ c) > 0):
        return INF, dirs[np.flatnonzero(norms == 0)[0]]
    ratios = np.abs(dirs @ c) / np.where(norms > 0, norms, 1.0)
    j = int(np.argmax(ratios))
    best, zbest = float(ratios[j]), dirs[j]
    if refine:
        def neg(z):
            nz = norm_fn(z)
            return -abs(c @ z) / nz if nz > 0 else 0.0

        # the ratio is nonsmooth at kinks of the norm, so restart from several good samples
        for k in np.argsort(-ratios)[:restarts]:
            res = minimize(neg, dirs[k], method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000})
            if -res.fun > best:
                best, zbest = float(-res.fun), res.x
    return best, zbest


def conjugate_on_grid(f, ys, xs) -> np.ndarray:
    """``max_x (y x - f(x))`` over a sample grid xs, for each y (1-d)."""
    fx = np.array([f(x) for x in xs])
    fin = np.isfinite(fx)
    return np.max(np.asarray(ys)[:, None] * xs[fin][None, :] - fx[fin][None, :], axis=1)


def envelope_brute(xs, ys, at) -> np.ndarray:
    """Lower convex envelope of 1-d samples: min over chords covering each query point."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    out = []
    for t in np.asarray(at, dtype=float):
        best = INF
        for i in range(xs.size):
            if xs[i] == t:
                best = min(best, ys[i])
            for j in range(i + 1, xs.size):
                lo, hi = xs[i], xs[j]
                if lo <= t <= hi:
                    lam = (t - lo) / (hi - lo)
                    best = min(best, (1 - lam) * ys[i] + lam * ys[j])
        out.append(best)
    return np.array(out)


def block_operator_bound(c, norm_fn) -> float:
    return dual_norm_sampled(c, norm_fn)[0]
