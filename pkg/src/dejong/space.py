"""Finite product probability spaces and exact expectations over subset kernels.

Coordinates are indexed 1..n. A :class:`SubsetKernel` stores a function of the
coordinates in a subset ``J`` as a dense ``numpy`` array with one axis per
element of ``J`` (in increasing order), so row-major flattening matches the
model file layout.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import BudgetError, ModelError

DEFAULT_BUDGET = 2**24
PROB_TOL = 1e-12


@dataclass(frozen=True)
class Coordinate:
    support: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        support = tuple(float(x) for x in self.support)
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)
        if len(support) < 1 or len(support) != len(probs):
            raise ModelError("coordinate needs matching, nonempty support and probs")
        if any(not p > 0 for p in probs):
            raise ModelError("coordinate probabilities must be strictly positive")
        if abs(math.fsum(probs) - 1.0) > PROB_TOL:
            raise ModelError(f"coordinate probabilities sum to {math.fsum(probs)!r}, not 1")
        if len(set(support)) != len(support):
            raise ModelError("coordinate atoms must be distinct")
        if not all(math.isfinite(x) for x in support):
            raise ModelError("coordinate atoms must be finite")

    @property
    def size(self) -> int:
        return len(self.support)

    def moment(self, k: int) -> float:
        return math.fsum(p * x**k for x, p in zip(self.support, self.probs))

    @classmethod
    def rademacher(cls) -> "Coordinate":
        return cls((-1.0, 1.0), (0.5, 0.5))


@dataclass(frozen=True)
class FiniteProductSpace:
    coordinates: tuple[Coordinate, ...]

    def __post_init__(self):
        coords = tuple(self.coordinates)
        if len(coords) < 1:
            raise ModelError("a product space needs at least one coordinate")
        object.__setattr__(self, "coordinates", coords)

    @classmethod
    def iid(cls, n: int, coordinate: Coordinate) -> "FiniteProductSpace":
        return cls((coordinate,) * n)

    @classmethod
    def rademacher(cls, n: int) -> "FiniteProductSpace":
        return cls.iid(n, Coordinate.rademacher())

    @property
    def n(self) -> int:
        return len(self.coordinates)

    @cached_property
    def _probs(self) -> tuple[np.ndarray, ...]:
        out = []
        for c in self.coordinates:
            a = np.array(c.probs, dtype=float)
            a.flags.writeable = False
            out.append(a)
        return tuple(out)

    @cached_property
    def _supports(self) -> tuple[np.ndarray, ...]:
        out = []
        for c in self.coordinates:
            a = np.array(c.support, dtype=float)
            a.flags.writeable = False
            out.append(a)
        return tuple(out)

    def probs(self, j: int) -> np.ndarray:
        self.check_index(j)
        return self._probs[j - 1]

    def support(self, j: int) -> np.ndarray:
        self.check_index(j)
        return self._supports[j - 1]

    def size(self, j: int) -> int:
        return len(self.coordinates[j - 1].support)

    def shape(self, subset: Iterable[int]) -> tuple[int, ...]:
        return tuple(self.size(j) for j in subset)

    def atoms(self, subset: Iterable[int]) -> int:
        return math.prod(self.shape(subset))

    def check_index(self, j: int) -> None:
        if not 1 <= j <= self.n:
            raise ModelError(f"coordinate index {j} outside [1, {self.n}]")


def _normalize_subset(subset: Iterable[int]) -> tuple[int, ...]:
    s = tuple(int(j) for j in subset)
    if any(b <= a for a, b in zip(s, s[1:])):
        raise ModelError(f"subset {s} is not strictly increasing")
    if s and s[0] < 1:
        raise ModelError(f"subset {s} has indices below 1")
    return s


@dataclass(frozen=True, eq=False)
class SubsetKernel:
    """A real function of the coordinates in ``subset``, as a dense table."""

    subset: tuple[int, ...]
    values: np.ndarray

    def __post_init__(self):
        subset = _normalize_subset(self.subset)
        values = np.array(self.values, dtype=float)
        if values.ndim != len(subset):
            raise ModelError(
                f"kernel on {subset} needs a {len(subset)}-dimensional table, got shape {values.shape}"
            )
        values.flags.writeable = False
        object.__setattr__(self, "subset", subset)
        object.__setattr__(self, "values", values)

    def __repr__(self):
        return f"SubsetKernel(subset={self.subset}, shape={self.values.shape})"

    @classmethod
    def constant(cls, c: float) -> "SubsetKernel":
        return cls((), np.array(float(c)))

    @classmethod
    def from_flat(cls, space: FiniteProductSpace, subset: Sequence[int], flat) -> "SubsetKernel":
        subset = _normalize_subset(subset)
        for j in subset:
            space.check_index(j)
        flat = np.asarray(flat, dtype=float).ravel()
        shape = space.shape(subset)
        if flat.size != math.prod(shape):
            raise ModelError(f"kernel on {subset} needs {math.prod(shape)} values, got {flat.size}")
        return cls(subset, flat.reshape(shape))

    @classmethod
    def from_function(cls, space: FiniteProductSpace, subset: Sequence[int], f: Callable[..., float]) -> "SubsetKernel":
        """Tabulate ``f(x_j for j in subset)`` over the product of the supports."""
        subset = _normalize_subset(subset)
        for j in subset:
            space.check_index(j)
        grids = [space.coordinates[j - 1].support for j in subset]
        flat = [f(*xs) for xs in itertools.product(*grids)]
        return cls.from_flat(space, subset, flat)

    def validate(self, space: FiniteProductSpace) -> None:
        for j in self.subset:
            space.check_index(j)
        if self.values.shape != space.shape(self.subset):
            raise ModelError(f"kernel on {self.subset} has shape {self.values.shape}, expected {space.shape(self.subset)}")

    def aligned(self, target: Sequence[int]) -> np.ndarray:
        """View of the table broadcastable against a table on ``target`` (a superset)."""
        pos = set(self.subset)
        if not pos.issubset(target):
            raise ModelError(f"{self.subset} is not contained in {tuple(target)}")
        it = iter(self.values.shape)
        return self.values.reshape([next(it) if j in pos else 1 for j in target])

    def scaled(self, c: float) -> "SubsetKernel":
        return SubsetKernel(self.subset, self.values * c)

    def flat(self) -> list[float]:
        return self.values.ravel().tolist()


def union(subsets: Iterable[Iterable[int]]) -> tuple[int, ...]:
    return tuple(sorted(set().union(*map(set, subsets))))


def check_budget(space: FiniteProductSpace, subset: Sequence[int], budget: int | None, factor: int = 1) -> None:
    if budget is None:
        return
    atoms = space.atoms(subset) * factor
    if atoms > budget:
        raise BudgetError(f"enumeration over {atoms} joint atoms exceeds the budget of {budget}")


def _integrate_axes(space: FiniteProductSpace, values: np.ndarray, subset: Sequence[int], drop: Iterable[int]) -> np.ndarray:
    axes = sorted((subset.index(j) for j in drop), reverse=True)
    for ax in axes:
        values = np.tensordot(values, space.probs(subset[ax]), axes=([ax], [0]))
    return values


def expectation(space: FiniteProductSpace, k: SubsetKernel) -> float:
    k.validate(space)
    return float(_integrate_axes(space, k.values, k.subset, k.subset))


def conditional_expectation(space: FiniteProductSpace, k: SubsetKernel, condition: Iterable[int]) -> SubsetKernel:
    """E[k | F_L]: integrate out the coordinates of ``k.subset`` not in ``condition``."""
    cond = set(condition)
    for j in cond:
        space.check_index(j)
    k.validate(space)
    drop = [j for j in k.subset if j not in cond]
    if not drop:
        return k
    keep = tuple(j for j in k.subset if j in cond)
    return SubsetKernel(keep, _integrate_axes(space, k.values, k.subset, drop))


def product_table(kernels: Sequence[SubsetKernel], target: Sequence[int] | None = None) -> tuple[tuple[int, ...], np.ndarray]:
    """Pointwise product of kernels as a dense table on the union of their subsets."""
    target = union(k.subset for k in kernels) if target is None else tuple(target)
    out = np.ones([1] * len(target))
    for k in kernels:
        out = out * k.aligned(target)
    return target, out


def multiply(kernels: Sequence[SubsetKernel]) -> SubsetKernel:
    target, table = product_table(kernels)
    return SubsetKernel(target, np.broadcast_to(table, _full_shape(kernels, target)).copy())


def _full_shape(kernels, target):
    sizes = {}
    for k in kernels:
        sizes.update(zip(k.subset, k.values.shape))
    return [sizes[j] for j in target]


def joint_moment(space: FiniteProductSpace, ks: Sequence[SubsetKernel], budget: int | None = DEFAULT_BUDGET) -> float:
    """E[prod_i k_i], enumerating only the union of the kernels' subsets."""
    if not ks:
        raise ModelError("joint_moment needs at least one kernel")
    for k in ks:
        k.validate(space)
    target = union(k.subset for k in ks)
    check_budget(space, target, budget)
    _, table = product_table(ks, target)
    table = np.broadcast_to(table, space.shape(target))
    return float(_integrate_axes(space, table, target, target))


def grid_values(space: FiniteProductSpace, kernels: Iterable[SubsetKernel], budget: int | None = DEFAULT_BUDGET) -> np.ndarray:
    """Sum of kernels evaluated at every atom of the full space (shape ``(m_1, ..., m_n)``)."""
    full = tuple(range(1, space.n + 1))
    check_budget(space, full, budget)
    out = np.zeros(space.shape(full))
    for k in kernels:
        k.validate(space)
        out = out + k.aligned(full)
    return out


def grid_expectation(space: FiniteProductSpace, table: np.ndarray) -> float:
    full = tuple(range(1, space.n + 1))
    return float(_integrate_axes(space, np.broadcast_to(table, space.shape(full)), full, full))
