"""Seeded instance generators and the acceptance suites.

Every suite takes an :class:`ExperimentConfig`, builds its instances from
``numpy.random.default_rng([seed, suite_id, instance])`` and returns a JSON
ready report.  Reports are deterministic given the config except for the
fields named ``time_s`` and ``elapsed_s``.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import oracles
from .convex_sets import (
    StratifiedConvexSet,
    ball_of_seminorm,
    contains_event,
    gauge_sandwich_check,
)
from .fenchel import (
    Grid,
    MaxAffine,
    MinusInf,
    PlusInf,
    StratifiedConvexFunction,
    biconjugate,
    classify_events,
    closure,
    evaluate,
    sample_domain_point,
)
from .l0_lattice import RandomScalar, ext_add, ext_mul, gen_inverse, sign
from .legendre import dlt, dlt_brute
from .polyhedra import Polyhedron
from .prob_core import Event, StratifiedSpace, make_space, uniform_space
from .rlc_module import (
    CondPNorm,
    ModuleElement,
    ModuleFunctional,
    WeightedCoord,
    apply_functional,
    decompose_functional,
    glue_functionals,
    hull_cc_representation,
    operator_bound,
    type_I_witness,
    type_II_witness,
)
from .risk import EntropicRiskSpec, axioms_report, risk_duality_report
from .separation import counterexample_probe, normalize_separator, separate, separate_strict

INF = math.inf

SUITES = (
    "duality",
    "closure",
    "separation",
    "strict",
    "gauge",
    "decomposition",
    "counterexample",
    "axioms",
    "legendre",
    "risk",
)

DEFAULT_COUNTS = {
    "duality": 200,
    "closure": 100,
    "separation": 200,
    "strict": 100,
    "gauge": 100,
    "decomposition": 100,
    "counterexample": 100,
    "axioms": 10000,
    "legendre": 50,
    "risk": 5,
}

DEFAULT_TOLS = {
    "duality": 1e-8,
    "closure": 1e-8,
    "separation": 1e-9,
    "strict": 0.0,
    "gauge": 1e-9,
    "decomposition": 1e-9,
    "counterexample": 0.0,
    "axioms": 1e-12,
    "legendre": 0.0,
    "risk": 1e-6,
}

ORACLES = {
    "duality": "evaluation of the generated MaxAffine function",
    "closure": "closed envelope computed from the epigraph, no conjugation",
    "separation": "LP hull membership and combinatorial vertex enumeration",
    "strict": "maximum of |f'| over enumerated vertices",
    "gauge": "membership and interior tests on the H-form",
    "decomposition": "direct evaluation of the glued functional",
    "counterexample": "exact rational comparisons",
    "axioms": "direct evaluation of the algebraic laws",
    "legendre": "O(n m) brute-force conjugate",
    "risk": "closed-form entropic risk",
}


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    suite: str = "all"
    seed: int = 0
    max_atoms: int = 4
    max_dims: int = 3
    count: int | None = None
    tol: dict = field(default_factory=dict)
    out: str | None = None

    def __post_init__(self):
        if self.suite != "all" and self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite!r}; choose from {', '.join(SUITES + ('all',))}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit nonnegative integer")
        if self.max_atoms < 1 or self.max_dims < 1:
            raise ConfigError("sizes must be at least 1")
        if self.count is not None and self.count < 1:
            raise ConfigError("instance count must be at least 1")
        for k, v in self.tol.items():
            if k not in SUITES:
                raise ConfigError(f"tolerance override for unknown suite {k!r}")
            if not (v >= 0 and math.isfinite(v)):
                raise ConfigError(f"tolerance for {k!r} must be finite and nonnegative")

    def n(self, suite: str) -> int:
        return self.count if self.count is not None else DEFAULT_COUNTS[suite]

    def tolerance(self, suite: str) -> float:
        return float(self.tol.get(suite, DEFAULT_TOLS[suite]))

    def to_json(self) -> dict:
        return asdict(self)


def _rng(seed: int, suite: str, i: int) -> np.random.Generator:
    return np.random.default_rng([seed, SUITES.index(suite), i])


# ---------------------------------------------------------------------------
# generators


def random_space(rng, max_atoms: int = 4, max_dims: int = 3, min_atoms: int = 1) -> StratifiedSpace:
    """Singleton E-atoms, F-atoms of random size, small-integer weights."""
    k = int(rng.integers(min_atoms, max(min_atoms, max_atoms) + 1))
    sizes = rng.integers(1, max_dims + 1, size=k)
    n = int(sizes.sum())
    w = rng.integers(1, 9, size=n).astype(float)
    w /= w.sum()
    fine = [[i] for i in range(n)]
    coarse, start = [], 0
    for s in sizes:
        coarse.append(list(range(start, start + int(s))))
        start += int(s)
    return make_space(w, fine, coarse)


def _dyadic(rng, size, lo=-8, hi=8, denom=4):
    return rng.integers(lo * denom, hi * denom + 1, size=size) / denom


def random_box(rng, d: int) -> Polyhedron:
    lo = -rng.integers(1, 4, size=d).astype(float)
    hi = rng.integers(1, 4, size=d).astype(float)
    return Polyhedron.from_h(np.vstack([np.eye(d), -np.eye(d)]), np.r_[hi, -lo], d)


def random_max_affine(rng, d: int, unbounded_domain: bool = False) -> MaxAffine:
    """Max of 1 to 5 affine pieces with dyadic coefficients on a box (or everywhere)."""
    k = int(rng.integers(1, 6))
    slopes = _dyadic(rng, (k, d), -3, 3)
    intercepts = _dyadic(rng, k, -3, 3)
    dom = None if unbounded_domain else random_box(rng, d)
    return MaxAffine(slopes, intercepts, dom, d)


def random_closed_function(rng, space: StratifiedSpace) -> StratifiedConvexFunction:
    pieces = []
    for a in range(space.n_atoms):
        d = space.block(a).size
        pieces.append(random_max_affine(rng, d, unbounded_domain=rng.random() < 0.2))
    return StratifiedConvexFunction(space, tuple(pieces))


def _grid_piece(rng, d: int, kind: str):
    axes = [np.arange(int(rng.integers(3, 6 if d == 1 else 4)), dtype=float) - 1 for _ in range(d)]
    shape = tuple(a.size for a in axes)
    vals = _dyadic(rng, shape, -4, 4)
    if kind == "nonconvex":
        return Grid(axes, vals)
    if kind == "holes":
        flat = vals.reshape(-1).copy()
        hole = rng.choice(flat.size, size=max(1, flat.size // 3), replace=False)
        flat[hole] = INF
        if np.all(np.isinf(flat)):
            flat[0] = 0.0
        return Grid(axes, flat.reshape(shape))
    if kind == "minus":
        flat = vals.reshape(-1).copy()
        flat[int(rng.integers(flat.size))] = -INF
        return Grid(axes, flat.reshape(shape))
    if kind == "allplus":
        return Grid(axes, np.full(shape, INF))
    raise ValueError(kind)


MIXED_KINDS = ("max_affine", "minus_inf", "plus_inf", "grid_nonconvex", "grid_holes", "grid_minus", "grid_allplus", "max_affine_empty")


def random_mixed_function(rng, space: StratifiedSpace, kinds=None) -> StratifiedConvexFunction:
    """One piece per atom; kinds cycle so that MI, PI and BP atoms all occur across instances."""
    pieces = []
    for a in range(space.n_atoms):
        d = space.block(a).size
        kind = kinds[a] if kinds is not None else MIXED_KINDS[int(rng.integers(len(MIXED_KINDS)))]
        if kind == "max_affine":
            pieces.append(random_max_affine(rng, d))
        elif kind == "minus_inf":
            pieces.append(MinusInf(d))
        elif kind == "plus_inf":
            pieces.append(PlusInf(d))
        elif kind == "max_affine_empty":
            pieces.append(MaxAffine(_dyadic(rng, (1, d)), [0.0], Polyhedron.empty(d), d))
        else:
            pieces.append(_grid_piece(rng, d, kind[5:]) if d <= 2 else random_max_affine(rng, d))
    return StratifiedConvexFunction(space, tuple(pieces))


def random_polytope_vertices(rng, d: int) -> np.ndarray:
    """Full-dimensional polytope: a jittered simplex plus a few extra points."""
    base = np.vstack([np.zeros(d), np.eye(d)]) * rng.uniform(1, 3)
    extra = rng.uniform(-1, 2, size=(int(rng.integers(0, 4)), d))
    pts = np.vstack([base, extra]) + rng.normal(scale=0.1, size=(d + 1 + len(extra), d))
    return pts


def random_polytope_h(rng, d: int):
    k = int(rng.integers(d + 1, d + 5))
    A = rng.normal(size=(k, d))
    A = np.vstack([A, np.eye(d), -np.eye(d)])
    b = np.r_[rng.uniform(0.5, 2, size=k), np.full(2 * d, 3.0)]
    c = rng.uniform(-0.3, 0.3, size=d)
    return A, b + A @ c


def random_set(rng, space: StratifiedSpace, balanced: bool = False) -> StratifiedConvexSet:
    """Per atom either a V-form or an H-form polytope (symmetric when balanced)."""
    bodies = []
    for a in range(space.n_atoms):
        d = space.block(a).size
        if balanced:
            V = np.vstack([np.eye(d) * rng.uniform(0.5, 2, size=d), rng.normal(size=(int(rng.integers(0, 3)), d))])
            V = V @ (np.eye(d) + 0.2 * rng.normal(size=(d, d)))
            bodies.append(Polyhedron.from_v(np.vstack([V, -V])))
        elif rng.random() < 0.5:
            bodies.append(Polyhedron.from_v(random_polytope_vertices(rng, d)))
        else:
            A, b = random_polytope_h(rng, d)
            bodies.append(Polyhedron.from_h(A, b, d))
    return StratifiedConvexSet(space, tuple(bodies))


def _interior_point(rng, B: Polyhedron) -> np.ndarray:
    c = B.points.mean(axis=0)
    p = rng.dirichlet(np.ones(len(B.points))) @ B.points
    return c + rng.uniform(0, 0.9) * (p - c)


def _exterior_point(rng, B: Polyhedron) -> np.ndarray:
    # beyond a vertex along the ray from the centroid: outside because the vertex is extreme
    c = B.points.mean(axis=0)
    v = B.points[int(rng.integers(len(B.points)))]
    return c + rng.uniform(1.2, 3) * (v - c)


def random_point(rng, M: StratifiedConvexSet, outside=None) -> tuple[np.ndarray, np.ndarray]:
    """Point with the given (or random) per-atom outside pattern; returns (x, pattern)."""
    sp = M.space
    if outside is None:
        outside = rng.random(sp.n_atoms) < 0.5
        if not outside.any():
            outside[int(rng.integers(sp.n_atoms))] = True
    x = np.zeros(sp.dim)
    for a, B in enumerate(M.bodies):
        x[sp.block(a)] = _exterior_point(rng, B) if outside[a] else _interior_point(rng, B)
    return x, np.asarray(outside, dtype=bool)


def random_seminorm_family(rng, space: StratifiedSpace, k: int = 3) -> list:
    """Weighted-coordinate seminorms with random zero patterns plus a conditional 1- or inf-norm."""
    fam = []
    for _ in range(k - 1):
        w = rng.integers(1, 5, size=space.dim).astype(float)
        w[rng.random(space.dim) < 0.4] = 0.0
        fam.append(WeightedCoord(tuple(w)))
    fam.append(CondPNorm(float(rng.choice([1.0, INF]))))
    return fam


def random_dyadic_grid(rng, n: int):
    xs = np.sort(rng.choice(np.arange(-4 * n, 4 * n + 1), size=n, replace=False)) / 8.0
    ys = rng.integers(-64, 65, size=n) / 16.0
    slopes = rng.integers(-128, 129, size=max(n, 16)) / 32.0
    return xs, ys, slopes


# ---------------------------------------------------------------------------
# suite helpers


def _gap(u: float, v: float) -> float:
    if math.isinf(u) or math.isinf(v):
        return 0.0 if u == v else INF
    return abs(u - v)


def _summary(name, cfg, results, tol, extra=None) -> dict:
    worst = max((r.get("gap", 0.0) for r in results), default=0.0)
    out = {
        "suite": name,
        "seed": cfg.seed,
        "tolerance": tol,
        "oracle": ORACLES[name],
        "n_instances": len(results),
        "n_passed": sum(r["ok"] for r in results),
        "worst_gap": worst,
        "instances": {str(r["id"]): r for r in results},
    }
    out["ok"] = out["n_passed"] == len(results)
    if extra:
        out.update(extra)
    return out


def _timed(fn):
    t = time.perf_counter()
    r = fn()
    r["time_s"] = time.perf_counter() - t
    return r


# ---------------------------------------------------------------------------
# suites


def suite_duality(cfg: ExperimentConfig) -> dict:
    """Biconjugate equals f on domain samples for random closed MaxAffine functions."""
    tol = cfg.tolerance("duality")
    res = []
    for i in range(cfg.n("duality")):
        def one(i=i):
            rng = _rng(cfg.seed, "duality", i)
            sp = random_space(rng, cfg.max_atoms, cfg.max_dims)
            f = random_closed_function(rng, sp)
            f2 = biconjugate(f)
            gap = 0.0
            for _ in range(100):
                x = sample_domain_point(f, rng)
                u, v = evaluate(f, x).values, evaluate(f2, x).values
                gap = max(gap, max(_gap(a, b) for a, b in zip(u, v)))
            return {"id": i, "atoms": sp.n_atoms, "dim": sp.dim, "gap": gap, "ok": gap <= tol}

        res.append(_timed(one))
    return _summary("duality", cfg, res, tol)


def suite_closure(cfg: ExperimentConfig) -> dict:
    """Biconjugate and closure have the same MI/PI/BP events and agree on BP atoms."""
    tol = cfg.tolerance("closure")
    res = []
    for i in range(cfg.n("closure")):
        def one(i=i):
            rng = _rng(cfg.seed, "closure", i)
            sp = random_space(rng, max(cfg.max_atoms, 3), min(cfg.max_dims, 2), min_atoms=3)
            # rotate through the kinds so each instance mixes several event types
            kinds = [MIXED_KINDS[(i + 3 * a) % len(MIXED_KINDS)] for a in range(sp.n_atoms)]
            f = random_mixed_function(rng, sp, kinds)
            g, h = biconjugate(f), closure(f)
            cg, ch = classify_events(g), classify_events(h)
            same = cg.same_events(ch)
            gap, exact = 0.0, True
            for _ in range(50):
                x = sample_domain_point(h, rng)
                x = x + (rng.normal(size=sp.dim) if rng.random() < 0.2 else 0.0)
                u, v = evaluate(g, x).values, evaluate(h, x).values
                for a in range(sp.n_atoms):
                    if a in ch.BP:
                        gap = max(gap, _gap(u[a], v[a]))
                    elif u[a] != v[a]:
                        exact = False
            ok = same and exact and gap <= tol
            return {"id": i, "kinds": kinds, "events": ch.to_json(), "same_events": same, "infinite_atoms_exact": exact, "gap": gap, "ok": ok}

        res.append(_timed(one))
    return _summary("closure", cfg, res, tol)


def _oracle_support(B: Polyhedron, c: np.ndarray, vertices=None) -> float:
    V = vertices if vertices is not None else oracles.vertices_from_h(B.A, B.b)
    return oracles.support_from_vertices(V, c)


def suite_separation(cfg: ExperimentConfig) -> dict:
    """strict_event matches the LP oracle; margins checked against enumerated vertices."""
    tol = cfg.tolerance("separation")
    res = []
    for i in range(cfg.n("separation")):
        def one(i=i):
            rng = _rng(cfg.seed, "separation", i)
            sp = random_space(rng, cfg.max_atoms, cfg.max_dims)
            M = random_set(rng, sp)
            x, _ = random_point(rng, M)
            cert = separate(x, M)
            verts = [oracles.vertices_from_h(B.A, B.b) for B in M.bodies]
            positive = {a for a in range(sp.n_atoms) if not oracles.in_hull_lp(verts[a], x[sp.block(a)])}
            fx = apply_functional(cert.functional, x, sp).values
            worst, ok = 0.0, set(cert.strict_event.atoms) == positive
            for a in range(sp.n_atoms):
                c = cert.functional.block(a, sp)
                m = fx[a] - oracles.support_from_vertices(verts[a], c)
                if a in positive:
                    ok &= m >= tol
                else:
                    ok &= abs(m) <= tol
                    worst = max(worst, abs(m))
                ok &= abs(cert.sup_over_M.values[a] - (fx[a] - m)) <= 1e-9 * (1 + abs(fx[a]))
            return {"id": i, "strict_event": sorted(cert.strict_event.atoms), "oracle_event": sorted(positive), "gap": worst, "ok": bool(ok)}

        res.append(_timed(one))
    return _summary("separation", cfg, res, tol)


def suite_strict(cfg: ExperimentConfig) -> dict:
    """All atoms outside: strict event is everything and the normalized functional meets its bounds exactly."""
    res = []
    for i in range(cfg.n("strict")):
        def one(i=i):
            rng = _rng(cfg.seed, "strict", i)
            sp = random_space(rng, cfg.max_atoms, cfg.max_dims)
            M = random_set(rng, sp, balanced=True)
            x, _ = random_point(rng, M, np.ones(sp.n_atoms, dtype=bool))
            cert = separate_strict(x, M)
            ns = normalize_separator(cert, M, x)
            sup_ok = True
            for a, B in enumerate(M.bodies):
                c = ns.functional.block(a, sp)
                sup_ok &= float(np.max(np.abs(B.points @ c))) <= 1.0
            fx = np.abs(apply_functional(ns.functional, x, sp).values)
            ok = cert.strict_event.is_omega and sup_ok and bool(np.all(ns.sup_abs_over_M.values <= 1.0)) and bool(np.any(fx > 1.0))
            return {
                "id": i,
                "strict_everywhere": cert.strict_event.is_omega,
                "sup_abs_le_1": bool(sup_ok),
                "atoms_above_1": int(np.sum(fx > 1.0)),
                "ok": bool(ok),
            }

        res.append(_timed(one))
    return _summary("strict", cfg, res, 0.0)


def random_balanced_body_set(rng, space: StratifiedSpace, i: int) -> StratifiedConvexSet:
    """Alternate symmetric V-polytopes with balls of polyhedral seminorms."""
    if i % 3 == 2:
        s = CondPNorm(1.0) if i % 2 else CondPNorm(INF)
        return ball_of_seminorm(s, RandomScalar(rng.uniform(0.5, 2, size=space.n_atoms)), space)
    return random_set(rng, space, balanced=True)


def suite_gauge(cfg: ExperimentConfig) -> dict:
    """interior => gauge < 1 => member => gauge <= 1 on 1000 sampled points per body."""
    tol = cfg.tolerance("gauge")
    res = []
    for i in range(cfg.n("gauge")):
        def one(i=i):
            rng = _rng(cfg.seed, "gauge", i)
            sp = random_space(rng, cfg.max_atoms, cfg.max_dims)
            U = random_balanced_body_set(rng, sp, i)
            rep = gauge_sandwich_check(U, 1000, seed=int(rng.integers(2**31)), slack=tol)
            return {
                "id": i,
                "interior": rep.interior_points,
                "gauge_below_1": rep.strict_points,
                "members": rep.members,
                "violations": len(rep.violations),
                "ok": rep.ok,
            }

        res.append(_timed(one))
    return _summary("gauge", cfg, res, tol)


def suite_decomposition(cfg: ExperimentConfig) -> dict:
    """Dominated functionals split along a concatenated seminorm and glue back exactly."""
    tol = cfg.tolerance("decomposition")
    res = []
    for i in range(cfg.n("decomposition")):
        def one(i=i):
            rng = _rng(cfg.seed, "decomposition", i)
            sp = random_space(rng, cfg.max_atoms, cfg.max_dims)
            P = random_seminorm_family(rng, sp)
            f = ModuleFunctional(_dyadic(rng, sp.dim, -4, 4))
            concat = type_II_witness(f, P, sp)
            xi = operator_bound(f, concat, sp)
            parts = decompose_functional(f, concat, xi, sp, seed=int(rng.integers(2**31)), tol=tol)
            g = glue_functionals(list(concat.events), parts, sp)
            exact, bound_gap = True, 0.0
            for _ in range(100):
                x = ModuleElement(rng.normal(size=sp.dim) * 3)
                exact &= np.array_equal(apply_functional(g, x, sp).values, apply_functional(f, x, sp).values)
                for ev, fk, sk in zip(concat.events, parts, concat.members):
                    lhs = np.abs(apply_functional(fk, x, sp).values)
                    rhs = (xi * sk.evaluate(x, sp)).values
                    viol = np.where(np.isfinite(rhs), lhs - rhs, -INF)
                    bound_gap = max(bound_gap, float(np.max(viol)))
            type_I = all(type_I_witness(fk, P, sp) is not None for fk in parts)
            rep = hull_cc_representation(f, parts, sp)
            ok = bool(exact) and bound_gap <= tol and type_I and rep is not None
            return {
                "id": i,
                "n_parts": len(parts),
                "glue_exact": bool(exact),
                "gap": max(bound_gap, 0.0),
                "parts_type_I": type_I,
                "glued_from_type_I": rep is not None,
                "ok": ok,
            }

        res.append(_timed(one))
    return _summary("decomposition", cfg, res, tol)


def suite_counterexample(cfg: ExperimentConfig, sizes=(4, 16, 64)) -> dict:
    """The probe returns a verified (A_U, y0) for random radii on every size."""
    res = []
    for n in sizes:
        sp = uniform_space([1] * n)
        for i in range(cfg.n("counterexample")):
            rng = _rng(cfg.seed, "counterexample", n * 1_000_003 + i)
            eps = np.exp(rng.uniform(-6, 1, size=n))
            t = time.perf_counter()
            pr = counterexample_probe(eps, sp)
            res.append(
                {
                    "id": f"{n}-{i}",
                    "n": n,
                    "A_U": pr.event.sorted(),
                    "band": pr.report["band"],
                    "ok": bool(pr.report["ok"] and pr.report["M_not_closed"]),
                    "time_s": time.perf_counter() - t,
                }
            )
    return _summary("counterexample", cfg, res, 0.0)


def _random_extended(rng, n: int) -> np.ndarray:
    v = rng.normal(size=n) * 10 ** rng.uniform(-3, 3, size=n)
    r = rng.random(n)
    v[r < 0.15] = INF
    v[(r >= 0.15) & (r < 0.3)] = -INF
    v[(r >= 0.3) & (r < 0.45)] = 0.0
    return v


def _mixed_scalars(rng, n: int) -> np.ndarray:
    """Finite values: zeros, dyadic values and generic doubles."""
    v = rng.normal(size=n) * 10 ** rng.uniform(-3, 3, size=n)
    r = rng.random(n)
    v[r < 0.2] = 0.0
    dy = (r >= 0.2) & (r < 0.5)
    v[dy] = rng.integers(-64, 65, size=int(dy.sum())) * 2.0 ** rng.integers(-6, 6, size=int(dy.sum()))
    return v


TRIANGLE_TOL = 1e-10


def axiom_checks(rng, tol: float) -> list[str]:
    """One randomized round of every algebraic law; returns the names of failed laws."""
    fails = []
    # extended arithmetic table
    a, b = _random_extended(rng, 8), _random_extended(rng, 8)
    s = ext_add(a, b)
    for u, v, w in zip(a, b, s):
        if INF in (u, v):
            exp = INF
        elif -INF in (u, v):
            exp = -INF
        else:
            exp = u + v
        if w != exp:
            fails.append("ext_add")
    p = ext_mul(a, b)
    for u, v, w in zip(a, b, p):
        if u == 0 or v == 0:
            exp = 0.0
        else:
            exp = u * v
        if w != exp:
            fails.append("ext_mul")
    # sign and generalized inverse
    xi = RandomScalar(_mixed_scalars(rng, 8))
    sg, inv = sign(xi), gen_inverse(xi)
    if not np.array_equal(sg.values * np.abs(xi.values), xi.values):
        fails.append("sign_abs")
    if not np.array_equal(np.abs(sg.values), (xi.values != 0).astype(float)):
        fails.append("sign_support")
    ind = (xi.values != 0).astype(float)
    prod = xi.values * inv.values
    if np.any(np.abs(prod - ind) > np.spacing(1.0)):
        fails.append("inverse_identity_ulp")
    dy = np.array([v == 0 or math.frexp(v)[0] in (0.5, -0.5) for v in xi.values])
    if not np.array_equal(prod[dy], ind[dy]):
        fails.append("inverse_identity_powers_of_two")
    if not np.array_equal(inv.values == 0, xi.values == 0):
        fails.append("inverse_support")
    # seminorm laws on a random space
    sp = random_space(rng, 3, 3)
    x, y = rng.normal(size=sp.dim) * 3, rng.normal(size=sp.dim) * 3
    c = rng.normal(size=sp.n_atoms) * 4
    for s_ in (CondPNorm(float(rng.choice([1.0, 2.0, 3.0, INF]))), WeightedCoord(tuple(rng.integers(0, 4, size=sp.dim).astype(float)))):
        nx = s_.evaluate(x, sp).values
        scaled = s_.evaluate(sp.expand(c) * x, sp).values
        if np.any(np.abs(scaled - np.abs(c) * nx) > tol * (1 + np.abs(c) * nx)):
            fails.append("seminorm_homogeneity")
        lhs = s_.evaluate(x + y, sp).values
        rhs = nx + s_.evaluate(y, sp).values
        if np.any(lhs > rhs + TRIANGLE_TOL * (1 + rhs)):
            fails.append("seminorm_triangle")
    return fails


def suite_axioms(cfg: ExperimentConfig) -> dict:
    tol = cfg.tolerance("axioms")
    rng = _rng(cfg.seed, "axioms", 0)
    t = time.perf_counter()
    counts: dict[str, int] = {}
    n = cfg.n("axioms")
    for _ in range(n):
        for name in axiom_checks(rng, tol):
            counts[name] = counts.get(name, 0) + 1
    res = [{"id": 0, "rounds": n, "violations": counts, "ok": not counts, "time_s": time.perf_counter() - t}]
    return _summary("axioms", cfg, res, tol)


LEGENDRE_SIZES = (1, 2, 3, 4, 5, 7, 8, 13, 16, 31, 32, 64, 100, 128, 255, 256, 384, 511, 512)


def suite_legendre(cfg: ExperimentConfig) -> dict:
    """Hull-walk conjugate equals brute force bitwise on dyadic grids of every listed size."""
    res = []
    for i in range(cfg.n("legendre")):
        def one(i=i):
            rng = _rng(cfg.seed, "legendre", i)
            mism, generic = 0, 0.0
            for n in LEGENDRE_SIZES:
                xs, ys, sl = random_dyadic_grid(rng, n)
                mism += int(np.sum(dlt(xs, ys, sl) != dlt_brute(xs, ys, sl)))
                gx = np.sort(rng.uniform(-5, 5, size=n))
                if np.all(np.diff(gx) > 0):
                    gy, gs = rng.normal(size=n), rng.normal(size=32) * 3
                    generic = max(generic, float(np.max(np.abs(dlt(gx, gy, gs) - dlt_brute(gx, gy, gs)))))
            return {"id": i, "mismatches": mism, "generic_max_abs_diff": generic, "gap": float(mism), "ok": mism == 0}

        res.append(_timed(one))
    return _summary("legendre", cfg, res, 0.0)


def suite_risk(cfg: ExperimentConfig) -> dict:
    """Entropic risk axioms at 1e-12 and biconjugate agreement at the duality tolerance."""
    tol = cfg.tolerance("risk")
    res = []
    for i in range(cfg.n("risk")):
        def one(i=i):
            rng = _rng(cfg.seed, "risk", i)
            sp = random_space(rng, cfg.max_atoms, cfg.max_dims)
            spec = EntropicRiskSpec(float(rng.uniform(0.2, 3)), sp)
            ax = axioms_report(spec, 200, seed=int(rng.integers(2**31)))
            du = risk_duality_report(spec, 200, seed=int(rng.integers(2**31)), tol=tol)
            return {"id": i, "gamma": spec.gamma, "axioms": ax, "duality_gap": du["max_gap"], "gap": du["max_gap"], "ok": bool(ax["ok"] and du["ok"])}

        res.append(_timed(one))
    return _summary("risk", cfg, res, tol)


SUITE_FUNCS = {
    "duality": suite_duality,
    "closure": suite_closure,
    "separation": suite_separation,
    "strict": suite_strict,
    "gauge": suite_gauge,
    "decomposition": suite_decomposition,
    "counterexample": suite_counterexample,
    "axioms": suite_axioms,
    "legendre": suite_legendre,
    "risk": suite_risk,
}


def run_suite(cfg: ExperimentConfig) -> dict:
    """Run one suite (or all) and return the report."""
    names = SUITES if cfg.suite == "all" else (cfg.suite,)
    t = time.perf_counter()
    suites = {}
    for name in names:
        t0 = time.perf_counter()
        rep = SUITE_FUNCS[name](cfg)
        rep["elapsed_s"] = time.perf_counter() - t0
        suites[name] = rep
    return {
        "config": cfg.to_json(),
        "suites": suites,
        "ok": all(r["ok"] for r in suites.values()),
        "elapsed_s": time.perf_counter() - t,
    }


def strip_timings(report):
    """Copy of a report without timing fields, for determinism comparisons."""
    if isinstance(report, dict):
        return {k: strip_timings(v) for k, v in report.items() if k not in ("time_s", "elapsed_s")}
    if isinstance(report, list):
        return [strip_timings(v) for v in report]
    return report


# ---------------------------------------------------------------------------
# instance checks for loaded files


def check_instance(inst) -> dict:
    """Run every check that the payload of a loaded instance supports."""
    out = {}
    sp = inst.space
    if inst.set is not None and inst.x is not None:
        inside = contains_event(inst.set, inst.x)
        if inside.is_omega:
            out["separation"] = {"strict_event": [], "ok": True, "note": "x lies in the set on every atom"}
        else:
            cert = separate(inst.x, inst.set, inst.seminorms or ())
            ok = all(cert.margin.values[a] > 0 for a in cert.strict_event)
            out["separation"] = {**cert.to_json(), "ok": bool(ok)}
    if inst.function is not None:
        f = inst.function
        f2, h = biconjugate(f), closure(f)
        same = classify_events(f2).same_events(classify_events(h))
        rng = np.random.default_rng(0)
        gap = 0.0
        for _ in range(100):
            x = sample_domain_point(h, rng)
            gap = max(gap, max(_gap(u, v) for u, v in zip(evaluate(f2, x).values, evaluate(h, x).values)))
        out["duality"] = {"events": classify_events(h).to_json(), "same_events": same, "gap": gap, "ok": same and gap <= DEFAULT_TOLS["closure"]}
    if inst.gamma is not None:
        spec = EntropicRiskSpec(inst.gamma, sp)
        ax = axioms_report(spec)
        du = risk_duality_report(spec)
        out["risk"] = {"axioms_ok": ax["ok"], "duality_gap": du["max_gap"], "ok": bool(ax["ok"] and du["ok"])}
    if inst.functional is not None and inst.seminorms:
        w = type_II_witness(inst.functional, inst.seminorms, sp)
        out["domination"] = {"dominated": w is not None, "ok": True}
        if w is not None:
            out["domination"]["operator_bound"] = operator_bound(inst.functional, w, sp).to_json()
    return {"checks": out, "ok": all(v["ok"] for v in out.values())}


def generate_instances(seed: int, count: int, max_atoms: int, max_dims: int) -> list[dict]:
    """Random instance payloads (space, set, point, function, seminorms, functional, gamma)."""
    from .serialization import Instance

    if count < 1:
        raise ConfigError("instance count must be at least 1")
    out = []
    for i in range(count):
        rng = np.random.default_rng([seed, 99, i])
        sp = random_space(rng, max_atoms, max_dims)
        M = random_set(rng, sp)
        x, _ = random_point(rng, M)
        inst = Instance(
            sp,
            x=ModuleElement(x),
            set=M,
            seminorms=random_seminorm_family(rng, sp),
            functional=ModuleFunctional(_dyadic(rng, sp.dim, -4, 4)),
            function=random_closed_function(rng, sp),
            gamma=float(rng.uniform(0.5, 2)),
        )
        out.append(inst.to_json())
    return out
