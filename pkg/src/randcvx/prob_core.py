"""Finite probability spaces with a fine and a coarse partition.

The fine blocks ("E-atoms") carry module coordinates; the coarse blocks
("F-atoms") carry the random scalars.  All sample-point weights are strictly
positive, so almost-sure statements are exact per-atom statements.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

WEIGHT_TOL = 1e-12


class SpaceError(ValueError):
    """Base class for structural validation failures."""


class NonPositiveWeightError(SpaceError):
    pass


class WeightSumError(SpaceError):
    pass


class PartitionError(SpaceError):
    """Blocks overlap, are empty, or do not cover the sample points."""


class RefinementError(SpaceError):
    pass


def _normalize_partition(blocks: Iterable[Iterable[int]], n: int, name: str) -> tuple[tuple[int, ...], ...]:
    out = []
    seen: set[int] = set()
    for blk in blocks:
        b = tuple(sorted(int(i) for i in blk))
        if not b:
            raise PartitionError(f"{name}: empty block")
        for i in b:
            if i < 0 or i >= n:
                raise PartitionError(f"{name}: index {i} out of range 0..{n - 1}")
            if i in seen:
                raise PartitionError(f"{name}: blocks overlap at point {i}")
            seen.add(i)
        if len(set(b)) != len(b):
            raise PartitionError(f"{name}: repeated index inside a block")
        out.append(b)
    if len(seen) != n:
        missing = sorted(set(range(n)) - seen)
        raise PartitionError(f"{name}: blocks do not cover points {missing}")
    return tuple(out)


def refines(fine: Sequence[Sequence[int]], coarse: Sequence[Sequence[int]]) -> bool:
    """True iff every block of `fine` lies inside a single block of `coarse`."""
    fine_pts = sorted(i for b in fine for i in b)
    coarse_pts = sorted(i for b in coarse for i in b)
    if fine_pts != coarse_pts:
        raise PartitionError("partitions are over different point sets")
    owner = {}
    for k, b in enumerate(coarse):
        for i in b:
            owner[i] = k
    return all(len({owner[i] for i in b}) == 1 for b in fine)


@dataclass(frozen=True)
class Event:
    """A set of F-atoms, i.e. an element of the coarse sigma-algebra."""

    atoms: frozenset
    n: int

    def __post_init__(self):
        object.__setattr__(self, "atoms", frozenset(int(a) for a in self.atoms))
        bad = [a for a in self.atoms if a < 0 or a >= self.n]
        if bad:
            raise ValueError(f"event atoms {bad} out of range for {self.n} atoms")

    @classmethod
    def omega(cls, n: int) -> "Event":
        return cls(frozenset(range(n)), n)

    @classmethod
    def empty(cls, n: int) -> "Event":
        return cls(frozenset(), n)

    @classmethod
    def from_mask(cls, mask) -> "Event":
        mask = np.asarray(mask, dtype=bool)
        return cls(frozenset(np.flatnonzero(mask).tolist()), mask.size)

    @property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.n, dtype=bool)
        m[list(self.atoms)] = True
        return m

    def complement(self) -> "Event":
        return Event(frozenset(range(self.n)) - self.atoms, self.n)

    def __and__(self, other: "Event") -> "Event":
        return Event(self.atoms & other.atoms, self.n)

    def __or__(self, other: "Event") -> "Event":
        return Event(self.atoms | other.atoms, self.n)

    def __sub__(self, other: "Event") -> "Event":
        return Event(self.atoms - other.atoms, self.n)

    def __contains__(self, atom) -> bool:
        return atom in self.atoms

    def __iter__(self):
        return iter(sorted(self.atoms))

    def __len__(self):
        return len(self.atoms)

    @property
    def is_empty(self) -> bool:
        return not self.atoms

    @property
    def is_omega(self) -> bool:
        return len(self.atoms) == self.n

    def sorted(self) -> list[int]:
        return sorted(self.atoms)


@dataclass(frozen=True, eq=False)
class StratifiedSpace:
    """Finite probability space with nested partitions.

    Attributes
    ----------
    weights : ndarray
        Probability of each sample point.
    fine : tuple of tuples
        E-atoms, each a tuple of sample-point indices.
    coarse : tuple of tuples
        F-atoms.  Every E-atom lies in exactly one F-atom.

    Module coordinates are indexed by E-atom (position in `fine`); random
    scalars by F-atom (position in `coarse`).
    """

    weights: np.ndarray
    fine: tuple
    coarse: tuple
    # derived
    fine_mass: np.ndarray = field(init=False, repr=False)
    coarse_mass: np.ndarray = field(init=False, repr=False)
    atom_of_fine: np.ndarray = field(init=False, repr=False)
    blocks: tuple = field(init=False, repr=False)

    def __post_init__(self):
        w = self.weights
        coarse_of_point = np.empty(len(w), dtype=int)
        for k, b in enumerate(self.coarse):
            coarse_of_point[list(b)] = k
        fine_mass = np.array([w[list(b)].sum() for b in self.fine])
        coarse_mass = np.array([w[list(b)].sum() for b in self.coarse])
        atom_of_fine = np.array([coarse_of_point[b[0]] for b in self.fine], dtype=int)
        blocks = tuple(np.flatnonzero(atom_of_fine == k) for k in range(len(self.coarse)))
        for arr in (fine_mass, coarse_mass, atom_of_fine):
            arr.setflags(write=False)
        for b in blocks:
            b.setflags(write=False)
        object.__setattr__(self, "fine_mass", fine_mass)
        object.__setattr__(self, "coarse_mass", coarse_mass)
        object.__setattr__(self, "atom_of_fine", atom_of_fine)
        object.__setattr__(self, "blocks", blocks)

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def n_atoms(self) -> int:
        """Number of F-atoms."""
        return len(self.coarse)

    @property
    def dim(self) -> int:
        """Number of E-atoms, i.e. the length of a module element."""
        return len(self.fine)

    def block(self, atom: int) -> np.ndarray:
        """E-atom indices inside F-atom `atom`."""
        return self.blocks[atom]

    def conditional_weights(self, atom: int) -> np.ndarray:
        """P(E-atom | F-atom) for the E-atoms inside `atom`."""
        return self.fine_mass[self.blocks[atom]] / self.coarse_mass[atom]

    def prob(self, event: Event) -> float:
        return float(self.coarse_mass[list(event.atoms)].sum()) if event.atoms else 0.0

    def omega(self) -> Event:
        return Event.omega(self.n_atoms)

    def empty_event(self) -> Event:
        return Event.empty(self.n_atoms)

    def expand(self, values) -> np.ndarray:
        """Spread one value per F-atom onto the E-atoms."""
        return np.asarray(values)[self.atom_of_fine]

    def to_points(self, coords) -> np.ndarray:
        """Spread one value per E-atom onto the sample points."""
        out = np.empty(self.n)
        for j, b in enumerate(self.fine):
            out[list(b)] = coords[j]
        return out

    def __eq__(self, other):
        return (
            isinstance(other, StratifiedSpace)
            and np.array_equal(self.weights, other.weights)
            and self.fine == other.fine
            and self.coarse == other.coarse
        )

    def __hash__(self):
        return hash((self.weights.tobytes(), self.fine, self.coarse))


def make_space(weights, fine_partition, coarse_partition) -> StratifiedSpace:
    """Validate the inputs and build a :class:`StratifiedSpace`.

    Indices are 0-based sample-point positions.
    """
    w = np.asarray(weights, dtype=float).copy()
    if w.ndim != 1 or w.size == 0:
        raise SpaceError("weights must be a nonempty 1-d sequence")
    if np.any(~np.isfinite(w)) or np.any(w <= 0):
        raise NonPositiveWeightError("every weight must be strictly positive")
    if abs(w.sum() - 1.0) > WEIGHT_TOL:
        raise WeightSumError(f"weights must sum to 1 (got {w.sum()!r})")
    n = w.size
    fine = _normalize_partition(fine_partition, n, "fine")
    coarse = _normalize_partition(coarse_partition, n, "coarse")
    if not refines(fine, coarse):
        raise RefinementError("fine must refine coarse")
    w.setflags(write=False)
    return StratifiedSpace(w, fine, coarse)


def uniform_space(atom_sizes: Sequence[int]) -> StratifiedSpace:
    """Uniform weights, singleton E-atoms, consecutive F-atoms of the given sizes."""
    n = int(sum(atom_sizes))
    fine = [[i] for i in range(n)]
    coarse, start = [], 0
    for s in atom_sizes:
        coarse.append(list(range(start, start + s)))
        start += s
    return make_space(np.full(n, 1.0 / n), fine, coarse)


def cond_expect(x, space: StratifiedSpace, partition=None):
    """Conditional expectation of a pointwise random variable.

    Parameters
    ----------
    x : array_like, length ``space.n``
        Finite value per sample point.
    partition : sequence of blocks, optional
        Conditioning partition; defaults to the coarse one.  Use
        ``space.fine`` to condition on the E-atoms.

    Returns
    -------
    RandomScalar
        One value per block: ``sum(w_i x_i) / P(block)``.
    """
    from .l0_lattice import RandomScalar

    x = np.asarray(x, dtype=float)
    if x.shape != (space.n,):
        raise ValueError(f"expected {space.n} values, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("conditional expectation needs finite values")
    blocks = space.coarse if partition is None else _normalize_partition(partition, space.n, "partition")
    w = space.weights
    vals = [float(np.dot(w[list(b)], x[list(b)]) / w[list(b)].sum()) for b in blocks]
    return RandomScalar(vals)
