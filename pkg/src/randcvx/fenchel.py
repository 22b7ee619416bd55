"""Local convex functions E -> extended L^0(F) and their conjugates.

A :class:`StratifiedConvexFunction` holds one piece per F-atom; the value on
an atom depends only on that atom's coordinates, so locality holds by
construction and every operation below runs atom by atom.

Piece kinds
-----------
MaxAffine
    ``max_k (a_k . z + c_k)`` on a polyhedral domain, ``+inf`` outside.  With
    no pieces it is ``-inf`` on the domain.
Quadratic
    ``z.Q.z / 2 + b.z + c`` with Q positive semidefinite.
Grid
    Multilinear interpolation of extended-real node values on a box grid.
MinusInf, PlusInf
    Constant pieces.
Entropic
    ``log(sum_j pi_j exp(-gamma z_j)) / gamma``.
EntropicPenalty, EntropicDual
    Its conjugate (relative entropy on the negative simplex) and the lazy
    conjugate of that, evaluated by a one-dimensional bisection.
PointwiseMax
    Lazy pointwise maximum of pieces of mixed kinds.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .l0_lattice import RandomScalar, _num_from_json, _num_to_json, ext_add, ext_mul
from .legendre import hull_pieces, lower_hull
from .polyhedra import Polyhedron
from .prob_core import Event, StratifiedSpace
from .rlc_module import ModuleElement, ModuleFunctional, _coords, apply_functional
from .separation import separate_point_polyhedron

INF = math.inf
DOMAIN_TOL = 1e-10


class ConjugationError(ValueError):
    pass


class PreconditionError(ValueError):
    """A precondition failed; ``atoms`` lists the offending F-atoms."""

    def __init__(self, msg, atoms=()):
        super().__init__(msg)
        self.atoms = tuple(atoms)


# ---------------------------------------------------------------------------
# pieces


class Piece:
    dim: int
    kind: str = "?"

    def evaluate(self, z) -> float:
        raise NotImplementedError

    def conjugate(self) -> "Piece":
        raise ConjugationError(f"no conjugate available for {self.kind}")

    def closure(self) -> "Piece":
        return self

    def domain(self) -> Polyhedron | None:
        """Polyhedral domain, or None for the whole space."""
        return None

    def classify(self):
        """('MI' | 'PI' | 'BP', witness block or None)."""
        return "BP", np.zeros(self.dim)

    def is_closed(self) -> bool:
        return True

    def sample_domain(self, rng) -> np.ndarray:
        return rng.normal(size=self.dim)

    def to_json(self) -> dict:
        raise NotImplementedError


def _affine_max(slopes, intercepts, z):
    return float(np.max(slopes @ z + intercepts))


class MaxAffine(Piece):
    kind = "max_affine"

    def __init__(self, slopes, intercepts, domain: Polyhedron | None = None, dim: int | None = None):
        sl = np.asarray(slopes, dtype=float)
        if dim is None:
            if sl.ndim != 2:
                raise ValueError("pass dim when there are no affine pieces")
            dim = sl.shape[1]
        self.dim = dim
        self.slopes = sl.reshape(-1, dim)
        self.intercepts = np.asarray(intercepts, dtype=float).reshape(-1)
        if self.slopes.shape[0] != self.intercepts.size:
            raise ValueError("one intercept per slope row is required")
        if not np.all(np.isfinite(self.slopes)) or not np.all(np.isfinite(self.intercepts)):
            raise ValueError("affine pieces must be finite")
        if domain is not None and domain.dim != dim:
            raise ValueError("domain dimension mismatch")
        self.dom = domain

    def __repr__(self):
        return f"MaxAffine(K={len(self.intercepts)}, dim={self.dim}, domain={self.dom!r})"

    @property
    def n_pieces(self) -> int:
        return self.intercepts.size

    def domain(self):
        return self.dom

    def in_domain(self, z) -> bool:
        return self.dom is None or self.dom.contains(z, DOMAIN_TOL)

    def evaluate(self, z):
        z = np.asarray(z, dtype=float)
        if not self.in_domain(z):
            return INF
        if self.n_pieces == 0:
            return -INF
        return _affine_max(self.slopes, self.intercepts, z)

    def epigraph(self) -> Polyhedron:
        """``{(z, t) : a_k.z + c_k <= t, z in dom}`` in dimension ``dim + 1``."""
        d = self.dim
        rows = [np.c_[self.slopes, -np.ones(self.n_pieces)]]
        rhs = [-self.intercepts]
        if self.dom is not None:
            rows.append(np.c_[self.dom.A, np.zeros(len(self.dom.b))])
            rhs.append(self.dom.b)
        return Polyhedron.from_h(np.vstack(rows), np.concatenate(rhs), d + 1)

    def conjugate(self):
        if self.dom is not None and self.dom.is_empty:
            return MinusInf(self.dim)
        if self.n_pieces == 0:
            return PlusInf(self.dim)
        epi = self.epigraph()
        return _max_affine_from_generators(epi.points, epi.rays, self.dim)

    def classify(self):
        if self.dom is not None and self.dom.is_empty:
            return "PI", None
        w = np.zeros(self.dim) if self.dom is None else self.dom.points[0].copy()
        return ("MI" if self.n_pieces == 0 else "BP"), w

    def is_closed(self):
        if self.n_pieces == 0:
            return self.dom is None or self.dom.is_empty or self.dom.A.shape[0] == 0
        return True

    def closure(self):
        kind, _ = self.classify()
        if kind == "MI":
            return MinusInf(self.dim)
        if kind == "PI":
            return PlusInf(self.dim)
        return self

    def sample_domain(self, rng):
        if self.dom is None:
            return rng.normal(size=self.dim) * 3
        P = self.dom
        z = rng.dirichlet(np.ones(len(P.points))) @ P.points
        if len(P.rays):
            z = z + rng.exponential(size=len(P.rays)) @ P.rays
        return z

    def to_json(self):
        out = {"kind": self.kind, "dim": self.dim, "slopes": self.slopes.tolist(), "intercepts": self.intercepts.tolist()}
        out["domain"] = None if self.dom is None else {"A": self.dom.A.tolist(), "b": self.dom.b.tolist()}
        return out


def _max_affine_from_generators(points, rays, dim) -> Piece:
    """Conjugate from the generators of an epigraph in ``dim + 1`` coordinates.

    ``sup_{(z,t) in epi} (y.z - t)`` is the max over the points of
    ``y.z_v - t_v`` and is ``+inf`` as soon as ``y.r_z > r_t`` for a ray.
    """
    if len(points) == 0:
        return MinusInf(dim)
    slopes = points[:, :dim]
    intercepts = -points[:, dim]
    rows, rhs = [], []
    for r in rays:
        rz, rt = r[:dim], r[dim]
        if np.max(np.abs(rz)) <= 1e-14 * (1 + abs(rt)):
            if rt < 0:
                return PlusInf(dim)  # unbounded below epigraph: never for proper input
            continue
        rows.append(rz)
        rhs.append(rt)
    dom = None
    if rows:
        dom = Polyhedron.from_h(np.array(rows), np.array(rhs), dim)
        if dom.is_empty:
            return PlusInf(dim)
    return MaxAffine(slopes, intercepts, dom, dim)


class Quadratic(Piece):
    kind = "quadratic"

    def __init__(self, Q, b=None, c: float = 0.0):
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        if Q.shape[0] != Q.shape[1]:
            raise ValueError("Q must be square")
        if not np.allclose(Q, Q.T, atol=1e-12):
            raise ValueError("Q must be symmetric")
        ev = np.linalg.eigvalsh(Q)
        if ev.size and ev.min() < -1e-12 * max(1.0, abs(ev).max()):
            raise ValueError("Q must be positive semidefinite")
        self.dim = Q.shape[0]
        self.Q = Q
        self.b = np.zeros(self.dim) if b is None else np.asarray(b, dtype=float).reshape(self.dim)
        self.c = float(c)

    def __repr__(self):
        return f"Quadratic(dim={self.dim})"

    def evaluate(self, z):
        z = np.asarray(z, dtype=float)
        return float(0.5 * z @ self.Q @ z + self.b @ z + self.c)

    def gradient(self, z):
        return self.Q @ np.asarray(z, dtype=float) + self.b

    def conjugate(self):
        try:
            np.linalg.cholesky(self.Q)
        except np.linalg.LinAlgError:
            raise ConjugationError("quadratic conjugate needs a positive definite form") from None
        Qi = np.linalg.inv(self.Q)
        Qi = 0.5 * (Qi + Qi.T)
        return Quadratic(Qi, -Qi @ self.b, 0.5 * self.b @ Qi @ self.b - self.c)

    def to_json(self):
        return {"kind": self.kind, "Q": self.Q.tolist(), "b": self.b.tolist(), "c": self.c}


class MinusInf(Piece):
    kind = "minus_inf"

    def __init__(self, dim: int):
        self.dim = dim

    def __repr__(self):
        return f"MinusInf({self.dim})"

    def evaluate(self, z):
        return -INF

    def conjugate(self):
        return PlusInf(self.dim)

    def classify(self):
        return "MI", np.zeros(self.dim)

    def to_json(self):
        return {"kind": self.kind, "dim": self.dim}


class PlusInf(Piece):
    kind = "plus_inf"

    def __init__(self, dim: int):
        self.dim = dim

    def __repr__(self):
        return f"PlusInf({self.dim})"

    def evaluate(self, z):
        return INF

    def conjugate(self):
        return MinusInf(self.dim)

    def domain(self):
        return Polyhedron.empty(self.dim)

    def classify(self):
        return "PI", None

    def sample_domain(self, rng):
        return np.zeros(self.dim)

    def to_json(self):
        return {"kind": self.kind, "dim": self.dim}


class Grid(Piece):
    """Node values on a tensor grid, interpolated multilinearly inside each cell.

    Outside the box the piece is ``+inf``.  A point takes ``+inf`` if any
    cell corner carrying positive interpolation weight is ``+inf`` (then
    ``-inf`` if any such corner is ``-inf``); zero-weight corners do not count.
    """

    kind = "grid"

    def __init__(self, axes: Sequence, values):
        self.axes = tuple(np.asarray(a, dtype=float).reshape(-1) for a in axes)
        for a in self.axes:
            if a.size == 0 or np.any(np.diff(a) <= 0):
                raise ValueError("grid axes must be nonempty and strictly increasing")
        self.dim = len(self.axes)
        v = np.asarray(values, dtype=float)
        if v.shape != tuple(a.size for a in self.axes):
            raise ValueError(f"values shape {v.shape} does not match the axes")
        if np.any(np.isnan(v)):
            raise ValueError("NaN node value")
        self.values = v

    def __repr__(self):
        return f"Grid(shape={self.values.shape})"

    def nodes(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)

    def evaluate(self, z):
        z = np.asarray(z, dtype=float).reshape(self.dim)
        lo_idx, ts = [], []
        for a, zi in zip(self.axes, z):
            if zi < a[0] or zi > a[-1]:
                return INF
            if a.size == 1:
                lo_idx.append(0)
                ts.append(0.0)
                continue
            i = min(max(int(np.searchsorted(a, zi, side="right")) - 1, 0), a.size - 2)
            lo_idx.append(i)
            ts.append((zi - a[i]) / (a[i + 1] - a[i]))
        total, has_pinf, has_minf = 0.0, False, False
        for corner in itertools.product((0, 1), repeat=self.dim):
            w = 1.0
            idx = []
            for c, i, t in zip(corner, lo_idx, ts):
                w *= t if c else 1.0 - t
                idx.append(i + c)
            if w == 0.0:
                continue
            v = self.values[tuple(idx)]
            if v == INF:
                has_pinf = True
            elif v == -INF:
                has_minf = True
            else:
                total += w * v
        if has_pinf:
            return INF
        if has_minf:
            return -INF
        return float(total)

    def _finite_nodes(self):
        nodes = self.nodes()
        vals = self.values.reshape(-1)
        fin = np.isfinite(vals)
        return nodes[fin], vals[fin]

    def conjugate(self):
        vals = self.values.reshape(-1)
        if np.any(vals == -INF):
            return PlusInf(self.dim)
        pts, fv = self._finite_nodes()
        if len(pts) == 0:
            return MinusInf(self.dim)
        # multilinear cells attain the sup of y.z - f(z) at a corner, so only nodes matter
        if self.dim == 1:
            h = lower_hull(pts[:, 0], fv)
            return MaxAffine(pts[h], -fv[h], None, 1)
        return MaxAffine(pts, -fv, None, self.dim)

    def domain(self):
        pts, _ = self._finite_nodes()
        if len(pts) == 0:
            return Polyhedron.empty(self.dim)
        return Polyhedron.from_v(pts)

    def classify(self):
        vals = self.values.reshape(-1)
        nodes = self.nodes()
        if np.any(vals == -INF):
            return "MI", nodes[int(np.flatnonzero(vals == -INF)[0])]
        fin = np.flatnonzero(np.isfinite(vals))
        if fin.size == 0:
            return "PI", None
        return "BP", nodes[int(fin[0])]

    def closure(self):
        kind, _ = self.classify()
        if kind == "MI":
            return MinusInf(self.dim)
        if kind == "PI":
            return PlusInf(self.dim)
        return self.envelope()

    def envelope(self) -> MaxAffine:
        """Closed convex envelope as a MaxAffine piece (finite nodes only)."""
        pts, fv = self._finite_nodes()
        d = self.dim
        if d == 1:
            order = np.argsort(pts[:, 0])
            xs, ys = pts[order, 0], fv[order]
            sl, ic = hull_pieces(xs, ys)
            dom = Polyhedron.from_h([[1.0], [-1.0]], [xs[-1], -xs[0]], 1)
            return MaxAffine(sl.reshape(-1, 1), ic, dom, 1)
        up = np.zeros((1, d + 1))
        up[0, d] = 1.0
        epi = Polyhedron.from_v(np.c_[pts, fv], up)
        sl, ic, dA, db = [], [], [], []
        for a, b in zip(epi.A, epi.b):
            az, at = a[:d], a[d]
            if at < -1e-12:
                # az.z + at t <= b  <=>  t >= (az.z - b) / (-at)
                sl.append(az / -at)
                ic.append(-b / -at)
            elif abs(at) <= 1e-12:
                dA.append(az)
                db.append(b)
        dom = Polyhedron.from_h(np.array(dA).reshape(-1, d), np.array(db), d) if dA else None
        return MaxAffine(np.array(sl).reshape(-1, d), np.array(ic), dom, d)

    def is_closed(self):
        kind, _ = self.classify()
        if kind == "MI":
            return False
        if kind == "PI":
            return True
        env = self.envelope()
        probes = list(self.nodes())
        cells = [0.5 * (a[:-1] + a[1:]) if a.size > 1 else a for a in self.axes]
        probes += list(np.stack([m.reshape(-1) for m in np.meshgrid(*cells, indexing="ij")], axis=1))
        for z in probes:
            u, v = self.evaluate(z), env.evaluate(z)
            if math.isinf(u) or math.isinf(v):
                if u != v:
                    return False
            elif abs(u - v) > 1e-9 * (1 + abs(u)):
                return False
        return True

    def sample_domain(self, rng):
        pts, _ = self._finite_nodes()
        if len(pts) == 0:
            return np.array([a[0] for a in self.axes])
        return rng.dirichlet(np.ones(len(pts))) @ pts

    def to_json(self):
        return {
            "kind": self.kind,
            "axes": [a.tolist() for a in self.axes],
            "values": [_num_to_json(v) for v in self.values.reshape(-1)],
            "shape": list(self.values.shape),
        }


class Entropic(Piece):
    """``log(sum_j pi_j exp(-gamma z_j)) / gamma`` for conditional weights pi."""

    kind = "entropic"

    def __init__(self, gamma: float, pi):
        if not gamma > 0 or not math.isfinite(gamma):
            raise ValueError("gamma must be a positive finite number")
        self.gamma = float(gamma)
        self.pi = np.asarray(pi, dtype=float).reshape(-1)
        if np.any(self.pi <= 0) or abs(self.pi.sum() - 1) > 1e-12:
            raise ValueError("pi must be a strictly positive probability vector")
        self.dim = self.pi.size

    def __repr__(self):
        return f"Entropic(gamma={self.gamma}, dim={self.dim})"

    def evaluate(self, z):
        z = np.asarray(z, dtype=float)
        m = float(np.min(z))
        # shifting by the minimum makes one-coordinate atoms exact: value = -z
        s = float(np.dot(self.pi, np.exp(-self.gamma * (z - m))))
        return -m + math.log(s) / self.gamma

    def gradient(self, z):
        z = np.asarray(z, dtype=float)
        e = self.pi * np.exp(-self.gamma * (z - np.min(z)))
        return -e / e.sum()

    def conjugate(self):
        return EntropicPenalty(self.gamma, self.pi)

    def to_json(self):
        return {"kind": self.kind, "gamma": self.gamma}


class EntropicPenalty(Piece):
    """Conjugate of the entropic piece: ``KL(q | pi) / gamma`` at ``q = -y`` on the simplex."""

    kind = "entropic_penalty"
    SIMPLEX_TOL = 1e-12

    def __init__(self, gamma: float, pi):
        self.gamma = float(gamma)
        self.pi = np.asarray(pi, dtype=float).reshape(-1)
        self.dim = self.pi.size

    def __repr__(self):
        return f"EntropicPenalty(gamma={self.gamma}, dim={self.dim})"

    def evaluate(self, y):
        q = -np.asarray(y, dtype=float)
        if np.any(q < 0) or abs(q.sum() - 1.0) > self.SIMPLEX_TOL:
            return INF
        pos = q > 0
        return float(np.sum(q[pos] * np.log(q[pos] / self.pi[pos])) / self.gamma)

    def conjugate(self):
        return EntropicDual(self.gamma, self.pi)

    def domain(self):
        d = self.dim
        A = np.vstack([np.eye(d), np.ones((1, d)), -np.ones((1, d))])
        return Polyhedron.from_h(A, np.r_[np.zeros(d), -1.0, 1.0], d)

    def classify(self):
        return "BP", -self.pi.copy()

    def sample_domain(self, rng):
        return -rng.dirichlet(np.ones(self.dim))

    def to_json(self):
        return {"kind": self.kind, "gamma": self.gamma}


class EntropicDual(Piece):
    """Lazy conjugate of :class:`EntropicPenalty`.

    ``sup_{q in simplex} (-q.x - KL(q | pi)/gamma)``.  Stationarity gives
    ``q_j = pi_j exp(-gamma (x_j + lam) - 1)``; the multiplier ``lam`` is
    found by bisection on ``sum_j q_j = 1``, which is monotone in ``lam``.
    """

    kind = "entropic_dual"

    def __init__(self, gamma: float, pi, tol: float = 1e-10):
        self.gamma = float(gamma)
        self.pi = np.asarray(pi, dtype=float).reshape(-1)
        self.dim = self.pi.size
        self.tol = tol

    def __repr__(self):
        return f"EntropicDual(gamma={self.gamma}, dim={self.dim})"

    def _log_mass(self, x, lam):
        e = np.log(self.pi) - self.gamma * (x + lam) - 1.0
        m = e.max()
        return m + math.log(np.sum(np.exp(e - m)))

    def maximizer(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lo, hi = -1.0, 1.0
        while self._log_mass(x, lo) < 0:
            lo = 2 * lo - 1
        while self._log_mass(x, hi) > 0:
            hi = 2 * hi + 1
        # bisect far below the target tolerance; the value is flat to first order in lam
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self._log_mass(x, mid) > 0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= self.tol * 1e-4 * (1 + abs(mid)):
                break
        lam = 0.5 * (lo + hi)
        q = self.pi * np.exp(-self.gamma * (x + lam) - 1.0)
        return q / q.sum()

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        q = self.maximizer(x)
        pos = q > 0
        return float(-q @ x - np.sum(q[pos] * np.log(q[pos] / self.pi[pos])) / self.gamma)

    def conjugate(self):
        return EntropicPenalty(self.gamma, self.pi)

    def to_json(self):
        return {"kind": self.kind, "gamma": self.gamma}


class PointwiseMax(Piece):
    """Lazy pointwise maximum of pieces with a common dimension."""

    kind = "pointwise_max"

    def __init__(self, members: Sequence[Piece]):
        self.members = tuple(members)
        if not self.members:
            raise ValueError("empty maximum")
        self.dim = self.members[0].dim
        if any(m.dim != self.dim for m in self.members):
            raise ValueError("members must share the dimension")

    def __repr__(self):
        return f"PointwiseMax({list(self.members)})"

    def evaluate(self, z):
        return float(max(m.evaluate(z) for m in self.members))

    def domain(self):
        dom = None
        for m in self.members:
            d = m.domain()
            if d is None:
                continue
            dom = d if dom is None else dom.intersect(d)
        return dom

    def classify(self):
        kinds = [m.classify()[0] for m in self.members]
        if "PI" in kinds:
            return "PI", None
        dom = self.domain()
        if dom is not None and dom.is_empty:
            return "PI", None
        w = np.zeros(self.dim) if dom is None else dom.points[0].copy()
        if all(k == "MI" for k in kinds):
            return "MI", w
        return "BP", w

    def is_closed(self):
        return all(m.is_closed() for m in self.members)

    def closure(self):
        kind, _ = self.classify()
        if kind == "MI":
            return MinusInf(self.dim)
        if kind == "PI":
            return PlusInf(self.dim)
        return PointwiseMax([m.closure() for m in self.members])

    def sample_domain(self, rng):
        dom = self.domain()
        if dom is None:
            return rng.normal(size=self.dim)
        if dom.is_empty:
            return np.zeros(self.dim)
        z = rng.dirichlet(np.ones(len(dom.points))) @ dom.points
        if len(dom.rays):
            z = z + rng.exponential(size=len(dom.rays)) @ dom.rays
        return z

    def to_json(self):
        return {"kind": self.kind, "members": [m.to_json() for m in self.members]}


def piece_from_json(data: dict, pi=None) -> Piece:
    kind = data.get("kind")
    if kind == "max_affine":
        dim = int(data["dim"]) if "dim" in data else np.asarray(data["slopes"], dtype=float).shape[1]
        dom = data.get("domain")
        P = None if dom is None else Polyhedron.from_h(dom["A"], dom["b"], dim)
        return MaxAffine(np.asarray(data["slopes"], dtype=float).reshape(-1, dim), data["intercepts"], P, dim)
    if kind == "quadratic":
        return Quadratic(data["Q"], data.get("b"), data.get("c", 0.0))
    if kind == "grid":
        shape = tuple(data.get("shape") or [len(a) for a in data["axes"]])
        vals = np.array([_num_from_json(v) for v in np.asarray(data["values"], dtype=object).reshape(-1)]).reshape(shape)
        return Grid(data["axes"], vals)
    if kind == "minus_inf":
        return MinusInf(int(data["dim"]))
    if kind == "plus_inf":
        return PlusInf(int(data["dim"]))
    if kind in ("entropic", "entropic_penalty", "entropic_dual"):
        if pi is None:
            raise ValueError(f"{kind} needs the atom's conditional weights")
        cls = {"entropic": Entropic, "entropic_penalty": EntropicPenalty, "entropic_dual": EntropicDual}[kind]
        return cls(float(data["gamma"]), pi)
    if kind == "pointwise_max":
        return PointwiseMax([piece_from_json(m, pi) for m in data["members"]])
    raise ValueError(f"unknown function kind {kind!r}")


# ---------------------------------------------------------------------------
# stratified functions


@dataclass(frozen=True, eq=False)
class StratifiedConvexFunction:
    space: StratifiedSpace
    pieces: tuple

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        if len(self.pieces) != self.space.n_atoms:
            raise ValueError("one piece per F-atom is required")
        for a, p in enumerate(self.pieces):
            if p.dim != self.space.block(a).size:
                raise ValueError(f"piece {a} has dimension {p.dim}, atom has {self.space.block(a).size} coordinates")

    def __call__(self, x) -> RandomScalar:
        return evaluate(self, x)

    def to_json(self) -> dict:
        return {"atoms": [p.to_json() for p in self.pieces]}

    @classmethod
    def from_json(cls, data: dict, space: StratifiedSpace) -> "StratifiedConvexFunction":
        atoms = data["atoms"]
        if len(atoms) != space.n_atoms:
            raise ValueError("one piece per F-atom is required")
        return cls(space, tuple(piece_from_json(p, space.conditional_weights(a)) for a, p in enumerate(atoms)))


def evaluate(f: StratifiedConvexFunction, x) -> RandomScalar:
    xv = _coords(x)
    sp = f.space
    if xv.size != sp.dim:
        raise ValueError(f"element length {xv.size} does not match the space ({sp.dim})")
    return RandomScalar([p.evaluate(xv[sp.block(a)]) for a, p in enumerate(f.pieces)])


def conjugate(f: StratifiedConvexFunction) -> StratifiedConvexFunction:
    """Atomwise conjugate; the dual coordinates are the functional coefficients."""
    return StratifiedConvexFunction(f.space, tuple(p.conjugate() for p in f.pieces))


def biconjugate(f: StratifiedConvexFunction) -> StratifiedConvexFunction:
    return conjugate(conjugate(f))


def conjugate_at(f: StratifiedConvexFunction, g: ModuleFunctional) -> RandomScalar:
    return evaluate(conjugate(f), g.coeffs)


# ---------------------------------------------------------------------------
# classification and closure


@dataclass(frozen=True)
class EventClassification:
    MI: Event
    PI: Event
    BP: Event
    mi_witnesses: dict = field(default_factory=dict)
    bp_witnesses: dict = field(default_factory=dict)

    def same_events(self, other: "EventClassification") -> bool:
        return self.MI == other.MI and self.PI == other.PI and self.BP == other.BP

    def to_json(self) -> dict:
        return {"MI": self.MI.sorted(), "PI": self.PI.sorted(), "BP": self.BP.sorted()}


def classify_events(f: StratifiedConvexFunction) -> EventClassification:
    sp = f.space
    groups = {"MI": set(), "PI": set(), "BP": set()}
    mi_w, bp_w = {}, {}
    for a, p in enumerate(f.pieces):
        kind, w = p.classify()
        groups[kind].add(a)
        if w is not None:
            x = np.zeros(sp.dim)
            x[sp.block(a)] = w
            (mi_w if kind == "MI" else bp_w if kind == "BP" else {})[a] = ModuleElement(x)
    n = sp.n_atoms
    return EventClassification(
        Event(frozenset(groups["MI"]), n),
        Event(frozenset(groups["PI"]), n),
        Event(frozenset(groups["BP"]), n),
        mi_w,
        bp_w,
    )


def verify_witnesses(f: StratifiedConvexFunction, cls: EventClassification) -> bool:
    for a, x in cls.mi_witnesses.items():
        if evaluate(f, x).values[a] != -INF:
            return False
    for a, x in cls.bp_witnesses.items():
        if not math.isfinite(evaluate(f, x).values[a]):
            return False
    return set(cls.mi_witnesses) == cls.MI.atoms and set(cls.bp_witnesses) == cls.BP.atoms


def closure(f: StratifiedConvexFunction) -> StratifiedConvexFunction:
    """Greatest closed function below f: -inf on MI, +inf on PI, envelope on BP.

    The envelope is computed from the epigraph directly, without conjugation.
    """
    return StratifiedConvexFunction(f.space, tuple(p.closure() for p in f.pieces))


def is_closed(f: StratifiedConvexFunction) -> bool:
    """-inf on the whole of every MI atom, proper lsc convex on BP atoms."""
    return all(p.is_closed() for p in f.pieces)


def is_proper(f: StratifiedConvexFunction):
    """(proper?, glued witness finite on every atom or None)."""
    cls = classify_events(f)
    if not cls.BP.is_omega:
        return False, None
    sp = f.space
    x = np.zeros(sp.dim)
    for a, w in cls.bp_witnesses.items():
        x[sp.block(a)] = w.coords[sp.block(a)]
    return True, ModuleElement(x)


@dataclass
class CheckReport:
    name: str
    n_checks: int = 0
    violations: list = field(default_factory=list)
    worst_gap: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"name": self.name, "n_checks": self.n_checks, "violations": self.violations[:20], "worst_gap": self.worst_gap, "ok": self.ok}


def sample_domain_point(f: StratifiedConvexFunction, rng) -> np.ndarray:
    sp = f.space
    x = np.zeros(sp.dim)
    for a, p in enumerate(f.pieces):
        x[sp.block(a)] = p.sample_domain(rng)
    return x


def is_local_check(f: StratifiedConvexFunction, n_samples: int = 100, seed: int = 0) -> CheckReport:
    """Gluing two points along a random event glues their values."""
    sp = f.space
    rng = np.random.default_rng(seed)
    rep = CheckReport("locality")
    for i in range(n_samples):
        x = sample_domain_point(f, rng)
        y = sample_domain_point(f, rng)
        A = Event.from_mask(rng.random(sp.n_atoms) < 0.5)
        sel = A.mask[sp.atom_of_fine]
        glued = np.where(sel, x, y)
        lhs = evaluate(f, glued).values
        rhs = np.where(A.mask, evaluate(f, x).values, evaluate(f, y).values)
        # I_A f(x) = I_A f(I_A x)
        ia = ext_mul(A.mask.astype(float), evaluate(f, np.where(sel, x, 0.0)).values)
        ib = ext_mul(A.mask.astype(float), evaluate(f, x).values)
        rep.n_checks += 1
        if not (np.array_equal(lhs, rhs) and np.array_equal(ia, ib)):
            rep.violations.append({"sample": i, "event": A.sorted()})
    return rep


def is_l0_convex_check(f: StratifiedConvexFunction, n_samples: int = 100, seed: int = 0, tol: float = 1e-9) -> CheckReport:
    """``f(xi x + (1-xi) y) <= xi f(x) + (1-xi) f(y)`` with random xi in [0,1] per atom."""
    sp = f.space
    rng = np.random.default_rng(seed)
    rep = CheckReport("l0_convexity")
    for i in range(n_samples):
        x = sample_domain_point(f, rng)
        y = sample_domain_point(f, rng)
        xi = rng.random(sp.n_atoms)
        xe = sp.expand(xi)
        lhs = evaluate(f, xe * x + (1 - xe) * y).values
        rhs = ext_add(ext_mul(xi, evaluate(f, x).values), ext_mul(1 - xi, evaluate(f, y).values))
        rep.n_checks += 1
        fin = np.isfinite(lhs) & np.isfinite(rhs)
        gap = np.where(fin, lhs - rhs, 0.0)
        rep.worst_gap = max(rep.worst_gap, float(gap.max()))
        bad = (fin & (gap > tol * (1 + np.abs(rhs)))) | ((lhs == INF) & (rhs < INF))
        if np.any(bad):
            rep.violations.append({"sample": i, "atoms": np.flatnonzero(bad).tolist()})
    return rep


def fenchel_young_check(f: StratifiedConvexFunction, n_samples: int = 100, seed: int = 0, tol: float = 1e-9) -> CheckReport:
    """``f(x) + f*(g) >= g(x)`` on sampled primal and dual points."""
    sp = f.space
    fs = conjugate(f)
    rng = np.random.default_rng(seed)
    rep = CheckReport("fenchel_young")
    for i in range(n_samples):
        x = sample_domain_point(f, rng)
        g = ModuleFunctional(sample_domain_point(fs, rng))
        lhs = ext_add(evaluate(f, x).values, evaluate(fs, g.coeffs).values)
        rhs = apply_functional(g, x, sp).values
        rep.n_checks += 1
        fin = np.isfinite(lhs)
        short = np.where(fin, rhs - lhs, 0.0)
        rep.worst_gap = max(rep.worst_gap, float(short.max()))
        bad = (fin & (short > tol * (1 + np.abs(rhs)))) | (lhs == -INF)
        if np.any(bad):
            rep.violations.append({"sample": i, "atoms": np.flatnonzero(bad).tolist()})
    return rep


# ---------------------------------------------------------------------------
# suprema of closed families


def sup_piece(members: Sequence[Piece]) -> Piece:
    """Pointwise max; MaxAffine families merge exactly."""
    dim = members[0].dim
    if any(isinstance(m, PlusInf) for m in members):
        return PlusInf(dim)
    rest = [m for m in members if not isinstance(m, MinusInf)]
    if not rest:
        return MinusInf(dim)
    if len(rest) == 1:
        return rest[0]
    if all(isinstance(m, MaxAffine) for m in rest):
        slopes = np.vstack([m.slopes for m in rest])
        ints = np.concatenate([m.intercepts for m in rest])
        dom = None
        for m in rest:
            if m.dom is not None:
                dom = m.dom if dom is None else dom.intersect(m.dom)
        return MaxAffine(slopes, ints, dom, dim)
    return PointwiseMax(rest)


@dataclass
class SupReport:
    closed: bool
    mi_identity: bool
    pi_identity: bool
    pi_contains_union: bool
    classification: EventClassification

    def to_json(self) -> dict:
        return {
            "closed": self.closed,
            "mi_identity": self.mi_identity,
            "pi_identity": self.pi_identity,
            "pi_contains_union": self.pi_contains_union,
            "classification": self.classification.to_json(),
        }


def sup_closed(functions: Sequence[StratifiedConvexFunction]):
    """Pointwise supremum of closed functions, with a closedness report.

    The report checks ``MI(sup) = intersection of the MI(f)`` and compares
    ``PI(sup)`` with the union of the ``PI(f)``.  The union is always
    contained in ``PI(sup)``; equality can fail when the members are proper
    on an atom but their domains there do not meet.
    """
    if not functions:
        raise ValueError("empty family")
    sp = functions[0].space
    for i, f in enumerate(functions):
        if f.space != sp:
            raise ValueError("all functions must live on the same space")
        if not is_closed(f):
            raise PreconditionError(f"member {i} is not closed")
    pieces = tuple(sup_piece([f.pieces[a] for f in functions]) for a in range(sp.n_atoms))
    g = StratifiedConvexFunction(sp, pieces)
    cls = classify_events(g)
    member_cls = [classify_events(f) for f in functions]
    mi_int = member_cls[0].MI
    pi_union = member_cls[0].PI
    for c in member_cls[1:]:
        mi_int = mi_int & c.MI
        pi_union = pi_union | c.PI
    rep = SupReport(
        closed=is_closed(g),
        mi_identity=cls.MI == mi_int,
        pi_identity=cls.PI == pi_union,
        pi_contains_union=pi_union.atoms <= cls.PI.atoms,
        classification=cls,
    )
    return g, rep


# ---------------------------------------------------------------------------
# affine minorants


@dataclass(frozen=True)
class AffineMinorant:
    """``h(x) = g(x) + z`` with ``h(x0) = beta`` and ``h <= f``."""

    g: ModuleFunctional
    z: RandomScalar
    cases: tuple

    def __call__(self, x, space: StratifiedSpace) -> RandomScalar:
        return apply_functional(self.g, x, space) + self.z


def _epigraph_separator(piece: Piece, z0: np.ndarray, beta: float):
    """(g1, g2, delta) with ``g1.z + g2 t <= delta`` on the epigraph and ``> delta`` at (z0, beta)."""
    if isinstance(piece, Grid):
        piece = piece.envelope()
    if isinstance(piece, MaxAffine):
        d, _, delta = separate_point_polyhedron(np.r_[z0, beta], piece.epigraph())
        g1, g2 = d[:-1], float(d[-1])
        if abs(g2) <= 1e-13 * (1 + np.abs(d).max()):
            g2 = 0.0
        return g1, g2, float(delta)
    if isinstance(piece, (Quadratic, Entropic)):
        # supporting hyperplane of the epigraph at (z0, f(z0)); delta is f*(grad)
        gr = piece.gradient(z0)
        return gr, -1.0, float(gr @ z0 - piece.evaluate(z0))
    raise PreconditionError(f"affine minorant not available for {piece.kind}")


def _atom_minorant(piece: Piece, z0: np.ndarray, beta: float):
    g1, g2, delta = _epigraph_separator(piece, z0, beta)
    if g2 > 0:
        raise RuntimeError("separator points into the epigraph")
    if g2 < 0:
        slope = -g1 / g2
        return slope, beta - slope @ z0, 1
    # z0 lies outside the domain: tilt a minorant built at a domain point
    kind, w = piece.classify()
    w = np.asarray(w, dtype=float)
    b2 = piece.evaluate(w) - 1.0
    s2, i2 = _atom_minorant(piece, w, b2)[:2]
    hz0 = s2 @ z0 + i2
    if hz0 >= beta:
        slope = s2
    else:
        ht = delta - g1 @ z0  # negative: z0 is cut off by g1.z <= delta
        kappa = (beta - hz0) / ht if ht != 0 else 0.0
        slope = s2 - kappa * g1
    return slope, beta - slope @ z0, 2


def affine_minorant(f: StratifiedConvexFunction, x0, beta) -> AffineMinorant:
    """Affine ``h = g + z`` below f with ``h(x0) = beta``, built from epigraph separation."""
    sp = f.space
    xv = _coords(x0)
    bv = beta.values if isinstance(beta, RandomScalar) else np.broadcast_to(np.asarray(beta, dtype=float), (sp.n_atoms,))
    cls = classify_events(f)
    if not cls.BP.is_omega:
        raise PreconditionError("f must be proper", sorted(cls.MI.atoms | cls.PI.atoms))
    fx = evaluate(f, xv).values
    bad = [a for a in range(sp.n_atoms) if not (bv[a] < fx[a]) or not math.isfinite(bv[a])]
    if bad:
        raise PreconditionError("beta must be finite and strictly below f(x0)", bad)
    coeffs = np.zeros(sp.dim)
    zs, cases = np.zeros(sp.n_atoms), []
    for a, p in enumerate(f.pieces):
        blk = sp.block(a)
        slope, icpt, case = _atom_minorant(p, xv[blk], float(bv[a]))
        coeffs[blk] = slope
        zs[a] = icpt
        cases.append(case)
    return AffineMinorant(ModuleFunctional(coeffs), RandomScalar(zs), tuple(cases))
