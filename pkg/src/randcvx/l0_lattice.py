"""Extended-real random scalars: one value per F-atom.

Arithmetic follows the convention table used for conditional convex
functions::

    0 * (+-inf) = 0          +inf + (-inf) = +inf          +inf - (+inf) = +inf

i.e. a product with a zero factor is zero and any sum with a ``+inf``
operand is ``+inf``.  Infinities are IEEE sentinels, never large floats;
NaN is rejected everywhere.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .prob_core import Event

INF = math.inf


def _as_values(v) -> np.ndarray:
    if isinstance(v, RandomScalar):
        return v.values
    return np.asarray(v, dtype=float)


def ext_add(a, b) -> np.ndarray:
    """Extended addition; any ``+inf`` operand wins."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(invalid="ignore"):
        s = a + b
    return np.where(np.isposinf(a) | np.isposinf(b), INF, s)


def ext_sub(a, b) -> np.ndarray:
    return ext_add(a, -np.asarray(b, dtype=float))


def ext_mul(a, b) -> np.ndarray:
    """Extended product with ``0 * (+-inf) = 0``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(invalid="ignore"):
        p = a * b
    return np.where((a == 0) | (b == 0), 0.0, p)


class RandomScalar:
    """Element of the extended L^0 over the coarse partition."""

    __slots__ = ("values",)

    def __init__(self, values):
        v = np.array(values, dtype=float, copy=True).reshape(-1)
        if np.any(np.isnan(v)):
            raise ValueError("NaN is not an extended real")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __setattr__(self, *_):
        raise AttributeError("RandomScalar is immutable")

    # construction helpers
    @classmethod
    def const(cls, c: float, n: int) -> "RandomScalar":
        return cls(np.full(n, float(c)))

    @classmethod
    def indicator(cls, event: Event) -> "RandomScalar":
        return cls(event.mask.astype(float))

    @property
    def n(self) -> int:
        return self.values.size

    def __len__(self):
        return self.values.size

    def __getitem__(self, i):
        return self.values[i]

    def __iter__(self):
        return iter(self.values.tolist())

    def __repr__(self):
        return f"RandomScalar({self.values.tolist()})"

    def __eq__(self, other):
        if not isinstance(other, RandomScalar):
            return NotImplemented
        return self.values.shape == other.values.shape and bool(np.all(self.values == other.values))

    def __hash__(self):
        return hash(self.values.tobytes())

    def _check(self, other):
        o = _as_values(other)
        if o.ndim and o.size != self.values.size:
            raise ValueError(f"atom count mismatch: {self.values.size} vs {o.size}")
        return o

    def __add__(self, other):
        return RandomScalar(ext_add(self.values, self._check(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return RandomScalar(ext_sub(self.values, self._check(other)))

    def __rsub__(self, other):
        return RandomScalar(ext_sub(self._check(other), self.values))

    def __mul__(self, other):
        return RandomScalar(ext_mul(self.values, self._check(other)))

    __rmul__ = __mul__

    def __neg__(self):
        return RandomScalar(-self.values)

    def __abs__(self):
        return RandomScalar(np.abs(self.values))

    def on(self, event: Event) -> "RandomScalar":
        """``I_A * xi`` under the zero-times-infinity convention."""
        return RandomScalar(ext_mul(event.mask.astype(float), self.values))

    def restrict(self, event: Event) -> np.ndarray:
        return self.values[event.sorted()]

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def all_le(self, other, tol: float = 0.0) -> bool:
        o = self._check(other)
        return bool(np.all(self.values <= o + tol))

    def all_lt(self, other) -> bool:
        return bool(np.all(self.values < self._check(other)))

    def where_positive(self) -> Event:
        return Event.from_mask(self.values > 0)

    def maximum(self, other) -> "RandomScalar":
        return RandomScalar(np.maximum(self.values, self._check(other)))

    def minimum(self, other) -> "RandomScalar":
        return RandomScalar(np.minimum(self.values, self._check(other)))

    def to_json(self) -> list:
        return [_num_to_json(v) for v in self.values]

    @classmethod
    def from_json(cls, data) -> "RandomScalar":
        return cls([_num_from_json(v) for v in data])


def _num_to_json(v: float):
    if v == INF:
        return "inf"
    if v == -INF:
        return "-inf"
    return float(v)


def _num_from_json(v) -> float:
    if isinstance(v, str):
        if v in ("inf", "+inf"):
            return INF
        if v == "-inf":
            return -INF
        raise ValueError(f"bad extended-real token {v!r}")
    return float(v)


def glue(events: Sequence[Event], scalars: Sequence[RandomScalar]) -> RandomScalar:
    """Concatenate ``scalars[k]`` over the disjoint cover ``events``."""
    if len(events) != len(scalars):
        raise ValueError("one scalar per event is required")
    if not events:
        raise ValueError("empty partition")
    n = events[0].n
    covered = np.zeros(n, dtype=bool)
    out = np.zeros(n)
    for ev, xi in zip(events, scalars):
        m = ev.mask
        if np.any(covered & m):
            raise ValueError("events overlap")
        covered |= m
        out[m] = _as_values(xi)[m]
    if not covered.all():
        raise ValueError("events do not cover all atoms")
    return RandomScalar(out)


def lattice_sup(family: Sequence[RandomScalar]) -> RandomScalar:
    if not family:
        raise ValueError("supremum of an empty family")
    return RandomScalar(np.max(np.vstack([_as_values(f) for f in family]), axis=0))


def lattice_inf(family: Sequence[RandomScalar]) -> RandomScalar:
    if not family:
        raise ValueError("infimum of an empty family")
    return RandomScalar(np.min(np.vstack([_as_values(f) for f in family]), axis=0))


def gen_inverse(xi: RandomScalar) -> RandomScalar:
    """Generalized inverse: ``1/xi`` where nonzero, 0 elsewhere."""
    v = _as_values(xi)
    if not np.all(np.isfinite(v)):
        raise ValueError("generalized inverse needs finite values")
    out = np.zeros_like(v)
    nz = v != 0
    with np.errstate(over="ignore", divide="ignore"):
        out[nz] = 1.0 / v[nz]
    if np.any(np.isinf(out)):
        raise OverflowError(f"1/xi is not representable on atoms {np.flatnonzero(np.isinf(out)).tolist()}")
    return RandomScalar(out)


def sign(xi: RandomScalar) -> RandomScalar:
    """``|xi|^{-1} xi``; zero where xi vanishes."""
    v = _as_values(xi)
    if not np.all(np.isfinite(v)):
        raise ValueError("sign needs finite values")
    return RandomScalar(np.sign(v))


def compare_events(xi: RandomScalar, eta: RandomScalar) -> tuple[Event, Event, Event]:
    """Events ``[xi < eta]``, ``[xi = eta]``, ``[xi > eta]``."""
    a, b = _as_values(xi), _as_values(eta)
    if a.shape != b.shape:
        raise ValueError("atom count mismatch")
    return Event.from_mask(a < b), Event.from_mask(a == b), Event.from_mask(a > b)
