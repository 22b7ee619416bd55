"""The module L^0(E) over L^0(F): elements, functionals and L^0-seminorms.

A module element carries one real per E-atom.  Multiplication by a random
scalar scales every coordinate inside an F-atom by that atom's value, so a
functional with one coefficient per E-atom, acting as a blockwise dot
product, is automatically L^0(F)-linear.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from ._solver import solve
from .l0_lattice import RandomScalar, glue, lattice_sup
from .prob_core import Event, StratifiedSpace

INF = math.inf


class DominationError(ValueError):
    """A functional is not dominated by the given seminorm bound.

    ``witness`` is a module element exhibiting the violation.
    """

    def __init__(self, msg, witness=None, atom=None):
        super().__init__(msg)
        self.witness = witness
        self.atom = atom


# ---------------------------------------------------------------------------
# elements and functionals


class ModuleElement:
    __slots__ = ("coords",)

    def __init__(self, coords):
        c = np.array(coords, dtype=float, copy=True).reshape(-1)
        if not np.all(np.isfinite(c)):
            raise ValueError("module elements have finite coordinates")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    def __setattr__(self, *_):
        raise AttributeError("ModuleElement is immutable")

    @classmethod
    def zeros(cls, space: StratifiedSpace) -> "ModuleElement":
        return cls(np.zeros(space.dim))

    def __len__(self):
        return self.coords.size

    def __repr__(self):
        return f"ModuleElement({self.coords.tolist()})"

    def __eq__(self, other):
        if not isinstance(other, ModuleElement):
            return NotImplemented
        return self.coords.shape == other.coords.shape and bool(np.all(self.coords == other.coords))

    def __hash__(self):
        return hash(self.coords.tobytes())

    def __add__(self, other):
        return ModuleElement(self.coords + _coords(other))

    def __sub__(self, other):
        return ModuleElement(self.coords - _coords(other))

    def __neg__(self):
        return ModuleElement(-self.coords)

    def __mul__(self, c: float):
        return ModuleElement(self.coords * float(c))

    __rmul__ = __mul__

    def act(self, xi, space: StratifiedSpace) -> "ModuleElement":
        """Module action ``xi * x`` with ``xi`` a finite random scalar."""
        v = xi.values if isinstance(xi, RandomScalar) else np.asarray(xi, dtype=float)
        if not np.all(np.isfinite(v)):
            raise ValueError("module action needs a finite scalar")
        return ModuleElement(self.coords * space.expand(v))

    def on(self, event: Event, space: StratifiedSpace) -> "ModuleElement":
        """``I_A x``: zero the coordinates outside the event."""
        return ModuleElement(np.where(event.mask[space.atom_of_fine], self.coords, 0.0))

    def block(self, atom: int, space: StratifiedSpace) -> np.ndarray:
        return self.coords[space.block(atom)]

    def to_json(self) -> list:
        return self.coords.tolist()


def _coords(x) -> np.ndarray:
    return x.coords if isinstance(x, ModuleElement) else np.asarray(x, dtype=float)


def glue_elements(events: Sequence[Event], elements: Sequence[ModuleElement], space: StratifiedSpace) -> ModuleElement:
    """``sum_k I_{A_k} x_k`` over a disjoint cover of the F-atoms."""
    if len(events) != len(elements):
        raise ValueError("one element per event is required")
    covered = np.zeros(space.n_atoms, dtype=bool)
    out = np.zeros(space.dim)
    for ev, x in zip(events, elements):
        if np.any(covered & ev.mask):
            raise ValueError("events overlap")
        covered |= ev.mask
        sel = ev.mask[space.atom_of_fine]
        out[sel] = _coords(x)[sel]
    if not covered.all():
        raise ValueError("events do not cover all atoms")
    return ModuleElement(out)


class ModuleFunctional:
    """L^0(F)-linear map E -> L^0(F), one coefficient per E-atom."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=float, copy=True).reshape(-1)
        if not np.all(np.isfinite(c)):
            raise ValueError("functional coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __setattr__(self, *_):
        raise AttributeError("ModuleFunctional is immutable")

    def __repr__(self):
        return f"ModuleFunctional({self.coeffs.tolist()})"

    def __eq__(self, other):
        if not isinstance(other, ModuleFunctional):
            return NotImplemented
        return self.coeffs.shape == other.coeffs.shape and bool(np.all(self.coeffs == other.coeffs))

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def __call__(self, x, space: StratifiedSpace) -> RandomScalar:
        return apply_functional(self, x, space)

    def scaled(self, xi, space: StratifiedSpace) -> "ModuleFunctional":
        v = xi.values if isinstance(xi, RandomScalar) else np.asarray(xi, dtype=float)
        return ModuleFunctional(self.coeffs * space.expand(v))

    def on(self, event: Event, space: StratifiedSpace) -> "ModuleFunctional":
        return ModuleFunctional(np.where(event.mask[space.atom_of_fine], self.coeffs, 0.0))

    def block(self, atom: int, space: StratifiedSpace) -> np.ndarray:
        return self.coeffs[space.block(atom)]

    def to_json(self) -> dict:
        return {"coeffs": self.coeffs.tolist()}

    @classmethod
    def from_json(cls, data) -> "ModuleFunctional":
        return cls(data["coeffs"])


def apply_functional(f: ModuleFunctional, x, space: StratifiedSpace) -> RandomScalar:
    c = f.coeffs
    xv = _coords(x)
    if c.size != space.dim or xv.size != space.dim:
        raise ValueError(f"length mismatch: functional {c.size}, element {xv.size}, space {space.dim}")
    return RandomScalar(np.bincount(space.atom_of_fine, weights=c * xv, minlength=space.n_atoms))


def glue_functionals(events: Sequence[Event], fs: Sequence[ModuleFunctional], space: StratifiedSpace) -> ModuleFunctional:
    g = glue_elements(events, [ModuleElement(f.coeffs) for f in fs], space)
    return ModuleFunctional(g.coords)


# ---------------------------------------------------------------------------
# seminorms


class Seminorm:
    """Base class for the L^0-seminorm catalogue.

    Subclasses implement the per-atom pieces; evaluation, kernels and dual
    bounds are assembled atom by atom.
    """

    def evaluate(self, x, space: StratifiedSpace) -> RandomScalar:
        xv = _coords(x)
        if xv.size != space.dim:
            raise ValueError("element length does not match the space")
        return RandomScalar([self.atom_value(xv[space.block(a)], a, space) for a in range(space.n_atoms)])

    def atom_value(self, z: np.ndarray, atom: int, space: StratifiedSpace) -> float:
        raise NotImplementedError

    def kernel_mask(self, atom: int, space: StratifiedSpace) -> np.ndarray:
        """Coordinates of the atom that the seminorm ignores entirely."""
        raise NotImplementedError

    def cvx_expr(self, z, atom: int, space: StratifiedSpace):
        raise NotImplementedError

    def local(self, atom: int) -> "Seminorm":
        """The seminorm acting on `atom` (resolves concatenations)."""
        return self

    def is_polyhedral(self) -> bool:
        return False

    def validate(self, space: StratifiedSpace) -> None:
        pass

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class CondPNorm(Seminorm):
    """Conditional p-norm ``E[|x|^p | F]^(1/p)``; ``p = inf`` is the atomwise max."""

    p: float

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError(f"p must be in [1, inf], got {self.p}")

    def atom_value(self, z, atom, space):
        az = np.abs(z)
        if self.p == INF:
            return float(az.max()) if az.size else 0.0
        w = space.conditional_weights(atom)
        if self.p == 1:
            return float(np.dot(w, az))
        m = az.max() if az.size else 0.0
        if m == 0:
            return 0.0
        # scale to avoid overflow in |z|^p
        return float(m * np.dot(w, (az / m) ** self.p) ** (1.0 / self.p))

    def kernel_mask(self, atom, space):
        return np.zeros(space.block(atom).size, dtype=bool)

    def cvx_expr(self, z, atom, space):
        import cvxpy as cp

        if self.p == INF:
            return cp.norm_inf(z)
        w = space.conditional_weights(atom)
        if self.p == 1:
            return cp.sum(cp.multiply(w, cp.abs(z)))
        return cp.pnorm(cp.multiply(w ** (1.0 / self.p), z), self.p)

    def is_polyhedral(self):
        return self.p in (1, INF)

    def to_json(self):
        return {"kind": "cond_p", "p": "inf" if self.p == INF else self.p}


@dataclass(frozen=True)
class WeightedCoord(Seminorm):
    """Atomwise ``max_j a_j |x_j|`` with nonnegative weights ``a``."""

    coeffs: tuple

    def __post_init__(self):
        c = tuple(float(v) for v in self.coeffs)
        if any(not (v >= 0 and math.isfinite(v)) for v in c):
            raise ValueError("weights must be finite and nonnegative")
        object.__setattr__(self, "coeffs", c)

    def _w(self, atom, space):
        return np.asarray(self.coeffs)[space.block(atom)]

    def validate(self, space):
        if len(self.coeffs) != space.dim:
            raise ValueError("one weight per E-atom is required")

    def atom_value(self, z, atom, space):
        v = self._w(atom, space) * np.abs(z)
        return float(v.max()) if v.size else 0.0

    def kernel_mask(self, atom, space):
        return self._w(atom, space) == 0

    def cvx_expr(self, z, atom, space):
        import cvxpy as cp

        return cp.max(cp.multiply(self._w(atom, space), cp.abs(z)))

    def is_polyhedral(self):
        return True

    def to_json(self):
        return {"kind": "weighted", "coeffs": list(self.coeffs)}


@dataclass(frozen=True)
class FiniteSup(Seminorm):
    """``||x||_Q``: the pointwise supremum of finitely many seminorms."""

    members: tuple

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise ValueError("FiniteSup needs at least one member")

    def validate(self, space):
        for m in self.members:
            m.validate(space)

    def atom_value(self, z, atom, space):
        return max(m.atom_value(z, atom, space) for m in self.members)

    def kernel_mask(self, atom, space):
        k = self.members[0].kernel_mask(atom, space)
        for m in self.members[1:]:
            k = k & m.kernel_mask(atom, space)
        return k

    def cvx_expr(self, z, atom, space):
        import cvxpy as cp

        exprs = [m.cvx_expr(z, atom, space) for m in self.members]
        return exprs[0] if len(exprs) == 1 else cp.maximum(*exprs)

    def local(self, atom):
        locs = tuple(m.local(atom) for m in self.members)
        return locs[0] if len(locs) == 1 else FiniteSup(locs)

    def is_polyhedral(self):
        return all(m.is_polyhedral() for m in self.members)

    def to_json(self):
        return {"kind": "sup", "members": [m.to_json() for m in self.members]}


@dataclass(frozen=True)
class Concatenated(Seminorm):
    """``sum_k I_{A_k} ||.||_k`` over a disjoint cover of the F-atoms."""

    events: tuple
    members: tuple

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        object.__setattr__(self, "members", tuple(self.members))
        if len(self.events) != len(self.members) or not self.events:
            raise ValueError("one seminorm per event is required")
        n = self.events[0].n
        covered = np.zeros(n, dtype=bool)
        for ev in self.events:
            if np.any(covered & ev.mask):
                raise ValueError("events overlap")
            covered |= ev.mask
        if not covered.all():
            raise ValueError("events do not cover all atoms")

    def validate(self, space):
        if self.events[0].n != space.n_atoms:
            raise ValueError("event atom count does not match the space")
        for m in self.members:
            m.validate(space)

    def local(self, atom):
        for ev, m in zip(self.events, self.members):
            if atom in ev:
                return m.local(atom)
        raise KeyError(atom)

    def evaluate(self, x, space):
        return glue(list(self.events), [m.evaluate(x, space) for m in self.members])

    def atom_value(self, z, atom, space):
        return self.local(atom).atom_value(z, atom, space)

    def kernel_mask(self, atom, space):
        return self.local(atom).kernel_mask(atom, space)

    def cvx_expr(self, z, atom, space):
        return self.local(atom).cvx_expr(z, atom, space)

    def is_polyhedral(self):
        return all(m.is_polyhedral() for m in self.members)

    def to_json(self):
        return {
            "kind": "concat",
            "events": [ev.sorted() for ev in self.events],
            "members": [m.to_json() for m in self.members],
        }


def seminorm_from_json(data: dict, n_atoms: int | None = None) -> Seminorm:
    kind = data.get("kind")
    if kind == "cond_p":
        p = data["p"]
        return CondPNorm(INF if p in ("inf", "+inf") else float(p))
    if kind == "weighted":
        return WeightedCoord(tuple(data["coeffs"]))
    if kind == "sup":
        return FiniteSup(tuple(seminorm_from_json(m, n_atoms) for m in data["members"]))
    if kind == "concat":
        if n_atoms is None:
            n_atoms = 1 + max(a for ev in data["events"] for a in ev)
        events = tuple(Event(frozenset(ev), n_atoms) for ev in data["events"])
        return Concatenated(events, tuple(seminorm_from_json(m, n_atoms) for m in data["members"]))
    raise ValueError(f"unknown seminorm kind {kind!r}")


def cond_p_norm(x, p: float, space: StratifiedSpace) -> RandomScalar:
    """Conditional p-norm of a module element, one value per F-atom."""
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return CondPNorm(p).evaluate(x, space)


def eval_seminorm(s: Seminorm, x, space: StratifiedSpace) -> RandomScalar:
    s.validate(space)
    return s.evaluate(x, space)


def unit_ball_rows(s: Seminorm, atom: int, space: StratifiedSpace):
    """H-rows of the unit ball ``{z : s(z) <= 1}`` on one atom, or None if not polyhedral."""
    s = s.local(atom)
    k = space.block(atom).size
    if isinstance(s, CondPNorm):
        if s.p == INF:
            return np.vstack([np.eye(k), -np.eye(k)]), np.ones(2 * k)
        if s.p == 1:
            w = space.conditional_weights(atom)
            signs = np.array(np.meshgrid(*[[-1.0, 1.0]] * k, indexing="ij")).reshape(k, -1).T
            return signs * w, np.ones(len(signs))
        return None
    if isinstance(s, WeightedCoord):
        a = s._w(atom, space)
        rows = [e * a[j] for j in range(k) if a[j] > 0 for e in (np.eye(k)[j], -np.eye(k)[j])]
        if not rows:
            return np.zeros((0, k)), np.zeros(0)
        return np.array(rows), np.ones(len(rows))
    if isinstance(s, FiniteSup):
        parts = [unit_ball_rows(m, atom, space) for m in s.members]
        if any(p is None for p in parts):
            return None
        return np.vstack([p[0] for p in parts]), np.concatenate([p[1] for p in parts])
    return None


# ---------------------------------------------------------------------------
# dual bounds


def _unit_maximizer_p(c: np.ndarray, w: np.ndarray, p: float) -> tuple[float, np.ndarray]:
    """Max of ``c.z`` over the conditional p-ball with weights ``w``."""
    if p == INF:
        return float(np.abs(c).sum()), np.sign(c)
    cp_ = c * w ** (-1.0 / p)  # coefficients in the u = w^(1/p) z coordinates
    if p == 1:
        j = int(np.argmax(np.abs(cp_)))
        u = np.zeros_like(c)
        u[j] = 1.0 if cp_[j] >= 0 else -1.0
        return float(np.abs(cp_[j])), u * w ** (-1.0)
    q = p / (p - 1.0)
    val = float(np.linalg.norm(cp_, q))
    if val == 0:
        u = np.zeros_like(c)
        u[0] = 1.0
        return 0.0, u * w ** (-1.0 / p)
    u = np.sign(cp_) * (np.abs(cp_) / val) ** (q - 1.0)
    return val, u * w ** (-1.0 / p)


def atom_dual_bound(c: np.ndarray, s: Seminorm, atom: int, space: StratifiedSpace) -> tuple[float, np.ndarray]:
    """Smallest ``xi_A`` with ``|c.z| <= xi_A ||z||`` on one atom, plus a maximizer.

    When the bound is infinite the returned vector is a kernel direction on
    which the functional does not vanish.
    """
    c = np.asarray(c, dtype=float)
    if not np.any(c):
        z = np.zeros_like(c)
        return 0.0, z
    s = s.local(atom)
    ker = s.kernel_mask(atom, space)
    bad = ker & (c != 0)
    if np.any(bad):
        z = np.zeros_like(c)
        j = int(np.flatnonzero(bad)[0])
        z[j] = np.sign(c[j])
        return INF, z
    if isinstance(s, CondPNorm):
        return _unit_maximizer_p(c, space.conditional_weights(atom), s.p)
    if isinstance(s, WeightedCoord):
        a = s._w(atom, space)
        act = a > 0
        z = np.zeros_like(c)
        z[act] = np.sign(c[act]) / a[act]
        return float(np.sum(np.abs(c[act]) / a[act])), z
    # composite: restrict to coordinates outside the common kernel
    keep = ~ker
    if not np.any(keep):
        return 0.0, np.zeros_like(c)
    rows = unit_ball_rows(s, atom, space)
    if rows is not None:
        # polyhedral unit ball: the maximum sits at a vertex of its slice
        from .polyhedra import Polyhedron

        A, b = rows
        ball = Polyhedron.from_h(A[:, keep], b, int(keep.sum()))
        zk = ball.support_argmax(c[keep])
        z = np.zeros_like(c)
        z[keep] = zk
        return float(abs(np.dot(c, z))), z
    val, zk = _solve_dual_cvx_masked(s, c, keep, atom, space)
    z = np.zeros_like(c)
    z[keep] = zk
    return val, z


def _solve_dual_cvx_masked(s, c, keep, atom, space):
    import cvxpy as cp

    n = c.size
    zk = cp.Variable(int(keep.sum()))
    embed = np.zeros((n, int(keep.sum())))
    embed[np.flatnonzero(keep), np.arange(int(keep.sum()))] = 1.0
    z = embed @ zk
    prob = cp.Problem(cp.Maximize(c @ z), [s.cvx_expr(z, atom, space) <= 1])
    solve(prob, 1e-12)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise RuntimeError(f"dual-norm program ended with status {prob.status}")
    zv = embed @ np.asarray(zk.value, dtype=float)
    nz = s.atom_value(zv, atom, space)
    if nz > 0:
        zv = zv / nz
    return float(abs(np.dot(c, zv))), zv[keep]


def operator_bound(f: ModuleFunctional, s: Seminorm, space: StratifiedSpace) -> RandomScalar:
    """Per-atom operator norm of `f` with respect to `s` (``+inf`` if unbounded)."""
    s.validate(space)
    return RandomScalar([atom_dual_bound(f.block(a, space), s, a, space)[0] for a in range(space.n_atoms)])


def operator_bound_witnesses(f: ModuleFunctional, s: Seminorm, space: StratifiedSpace):
    """Operator bound together with one maximizing module element per atom."""
    vals, wits = [], []
    for a in range(space.n_atoms):
        v, z = atom_dual_bound(f.block(a, space), s, a, space)
        x = np.zeros(space.dim)
        x[space.block(a)] = z
        vals.append(v)
        wits.append(ModuleElement(x))
    return RandomScalar(vals), wits


# ---------------------------------------------------------------------------
# domination classes


def _subsets(P: Sequence[Seminorm]) -> Iterator[tuple]:
    for r in range(1, len(P) + 1):
        yield from itertools.combinations(range(len(P)), r)


def _as_sup(P, idx) -> Seminorm:
    return P[idx[0]] if len(idx) == 1 else FiniteSup(tuple(P[i] for i in idx))


def _bounded_on(f: ModuleFunctional, s: Seminorm, atom: int, space: StratifiedSpace) -> bool:
    c = f.block(atom, space)
    ker = s.local(atom).kernel_mask(atom, space)
    return not np.any(ker & (c != 0))


def type_I_witness(f: ModuleFunctional, P: Sequence[Seminorm], space: StratifiedSpace):
    """First finite sub-family (by size, then index order) dominating `f`, or None."""
    if not P:
        raise ValueError("seminorm family is empty")
    for idx in _subsets(P):
        s = _as_sup(P, idx)
        if all(_bounded_on(f, s, a, space) for a in range(space.n_atoms)):
            return s
    return None


def type_II_witness(f: ModuleFunctional, P: Sequence[Seminorm], space: StratifiedSpace):
    """A concatenation of finite sups from `P` dominating `f`, or None.

    Each atom takes the first dominating finite sub-family in enumeration
    order; atoms choosing the same sub-family are grouped into one event.
    """
    if not P:
        raise ValueError("seminorm family is empty")
    choice = {}
    for a in range(space.n_atoms):
        for idx in _subsets(P):
            if _bounded_on(f, _as_sup(P, idx), a, space):
                choice[a] = idx
                break
        else:
            return None
    groups: dict[tuple, list[int]] = {}
    for a, idx in choice.items():
        groups.setdefault(idx, []).append(a)
    events = tuple(Event(frozenset(v), space.n_atoms) for v in groups.values())
    members = tuple(_as_sup(P, idx) for idx in groups)
    return Concatenated(events, members)


def is_type_I(f: ModuleFunctional, P: Sequence[Seminorm], space: StratifiedSpace) -> bool:
    return type_I_witness(f, P, space) is not None


def is_type_II(f: ModuleFunctional, P: Sequence[Seminorm], space: StratifiedSpace) -> bool:
    return type_II_witness(f, P, space) is not None


def decompose_functional(
    f: ModuleFunctional,
    concat: Concatenated,
    xi: RandomScalar,
    space: StratifiedSpace,
    n_samples: int = 100,
    seed: int = 0,
    tol: float = 1e-9,
) -> list[ModuleFunctional]:
    """Split a dominated functional along the events of a concatenated seminorm.

    Requires ``|f(x)| <= xi * concat(x)``.  Returns ``f_k(x) = f(I_{A_k} x)``,
    one per event, so that ``|f_k| <= xi * s_k`` and gluing the ``f_k`` over
    the events gives back `f`.
    """
    concat.validate(space)
    if not isinstance(concat, Concatenated):
        concat = Concatenated((space.omega(),), (concat,))
    bound, wits = operator_bound_witnesses(f, concat, space)
    xv = xi.values
    for a in range(space.n_atoms):
        if bound.values[a] > xv[a] * (1 + tol) + tol:
            raise DominationError(
                f"|f(x)| exceeds xi * ||x|| on atom {a} (bound {bound.values[a]}, xi {xv[a]})",
                witness=wits[a],
                atom=a,
            )
    rng = np.random.default_rng(seed)
    for _ in range(n_samples):
        x = ModuleElement(rng.normal(size=space.dim))
        lhs = np.abs(apply_functional(f, x, space).values)
        rhs = (xi * concat.evaluate(x, space)).values
        bad = lhs > rhs + tol * (1 + rhs)
        if np.any(bad):
            a = int(np.flatnonzero(bad)[0])
            raise DominationError(f"sampled violation on atom {a}", witness=x, atom=a)
    return [f.on(ev, space) for ev in concat.events]


# ---------------------------------------------------------------------------
# concatenation hulls


def hull_cc_functionals(G: Sequence[ModuleFunctional], space: StratifiedSpace) -> Iterator[ModuleFunctional]:
    """Enumerate the distinct gluings of members of `G` over all event partitions.

    Every gluing is determined by which member is used on each atom, so the
    enumeration runs over assignments atom -> member and drops duplicates.
    """
    if not G:
        raise ValueError("G must be nonempty")
    seen = set()
    for assign in itertools.product(range(len(G)), repeat=space.n_atoms):
        c = np.zeros(space.dim)
        for a, g in enumerate(assign):
            blk = space.block(a)
            c[blk] = G[g].coeffs[blk]
        key = c.tobytes()
        if key not in seen:
            seen.add(key)
            yield ModuleFunctional(c)


def hull_cc_contains(h: ModuleFunctional, G: Sequence[ModuleFunctional], space: StratifiedSpace) -> bool:
    """Membership in the concatenation hull: each atom block matches some member."""
    for a in range(space.n_atoms):
        blk = h.block(a, space)
        if not any(np.array_equal(blk, g.block(a, space)) for g in G):
            return False
    return True


def hull_cc_representation(h: ModuleFunctional, G: Sequence[ModuleFunctional], space: StratifiedSpace):
    """Events and members realizing `h` as a gluing of `G`, or None."""
    groups: dict[int, list[int]] = {}
    for a in range(space.n_atoms):
        blk = h.block(a, space)
        for k, g in enumerate(G):
            if np.array_equal(blk, g.block(a, space)):
                groups.setdefault(k, []).append(a)
                break
        else:
            return None
    events = [Event(frozenset(v), space.n_atoms) for v in groups.values()]
    return events, [G[k] for k in groups]


def sup_of(P: Sequence[Seminorm]) -> Seminorm:
    return P[0] if len(P) == 1 else FiniteSup(tuple(P))


def lattice_sup_seminorms(P: Sequence[Seminorm], x, space: StratifiedSpace) -> RandomScalar:
    return lattice_sup([p.evaluate(x, space) for p in P])
