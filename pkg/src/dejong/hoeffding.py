"""Hoeffding decompositions, degeneracy checks, normalization and the influence quantity."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ModelError, NormalizationError
from .space import (
    DEFAULT_BUDGET,
    FiniteProductSpace,
    SubsetKernel,
    check_budget,
    conditional_expectation,
    expectation,
    grid_values,
    joint_moment,
)

DROP_TOL = 1e-12


def subset_key(subset: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    return (len(subset), tuple(subset))


def subsets_of(s: Sequence[int]) -> Iterable[tuple[int, ...]]:
    s = tuple(s)
    for r in range(len(s) + 1):
        yield from itertools.combinations(s, r)


def _second_moment(space: FiniteProductSpace, k: SubsetKernel) -> float:
    return joint_moment(space, [k, k], budget=None)


@dataclass(frozen=True)
class HoeffdingDecomposition:
    """Map ``J -> W_J`` of nonzero Hoeffding components, sorted by (|J|, J)."""

    space: FiniteProductSpace
    components: Mapping[tuple[int, ...], SubsetKernel]

    def __post_init__(self):
        comps = dict(sorted(self.components.items(), key=lambda kv: subset_key(kv[0])))
        for J, k in comps.items():
            if tuple(J) != k.subset:
                raise ModelError(f"component key {J} does not match kernel subset {k.subset}")
            k.validate(self.space)
        object.__setattr__(self, "components", comps)

    def __len__(self):
        return len(self.components)

    def __getitem__(self, subset):
        return self.components[tuple(subset)]

    def get(self, subset, default=None):
        return self.components.get(tuple(subset), default)

    def subsets(self) -> list[tuple[int, ...]]:
        return list(self.components)

    def kernels(self) -> list[SubsetKernel]:
        return list(self.components.values())

    def sigma2(self) -> dict[tuple[int, ...], float]:
        """E[W_J^2] per component (the variance, except for the constant term)."""
        return {J: _second_moment(self.space, k) for J, k in self.components.items()}

    def mean(self) -> float:
        k = self.components.get(())
        return float(k.values) if k is not None else 0.0

    def variance(self) -> float:
        return math.fsum(s for J, s in self.sigma2().items() if J)

    def scaled(self, c: float) -> "HoeffdingDecomposition":
        return HoeffdingDecomposition(self.space, {J: k.scaled(c) for J, k in self.components.items()})

    def grid(self, budget: int | None = DEFAULT_BUDGET) -> np.ndarray:
        return grid_values(self.space, self.kernels(), budget)


def merge(space: FiniteProductSpace, parts: Iterable[SubsetKernel], drop_tol: float = DROP_TOL) -> HoeffdingDecomposition:
    """Sum kernels sharing a subset; drop those whose second moment is below ``drop_tol``."""
    acc: dict[tuple[int, ...], np.ndarray] = {}
    for k in sorted(parts, key=lambda k: subset_key(k.subset)):
        if k.subset in acc:
            acc[k.subset] = acc[k.subset] + k.values
        else:
            acc[k.subset] = np.array(k.values)
    out = {}
    for J, table in acc.items():
        k = SubsetKernel(J, table)
        if _second_moment(space, k) >= drop_tol:
            out[J] = k
    return HoeffdingDecomposition(space, out)


def kernel_components(space: FiniteProductSpace, k: SubsetKernel) -> list[SubsetKernel]:
    """Hoeffding components of a single kernel, over the subsets of its own support."""
    cond = {L: conditional_expectation(space, k, L) for L in subsets_of(k.subset)}
    out = []
    for J in subsets_of(k.subset):
        table = np.zeros(space.shape(J))
        for L in subsets_of(J):
            sign = -1.0 if (len(J) - len(L)) % 2 else 1.0
            table = table + sign * cond[L].aligned(J)
        out.append(SubsetKernel(J, table))
    return out


def decompose(space: FiniteProductSpace, w: Sequence[SubsetKernel], budget: int | None = DEFAULT_BUDGET,
              drop_tol: float = DROP_TOL) -> HoeffdingDecomposition:
    """Hoeffding decomposition of ``sum(w)`` via the inclusion-exclusion formula."""
    parts = []
    for k in w:
        k.validate(space)
        check_budget(space, k.subset, budget, factor=2 ** len(k.subset))
        parts.extend(kernel_components(space, k))
    return merge(space, parts, drop_tol)


@dataclass(frozen=True)
class DegeneracyReport:
    ok: bool
    order: int
    offenders: tuple[tuple[int, ...], ...]

    def __bool__(self):
        return self.ok


def check_degenerate(dec: HoeffdingDecomposition, d: int, tol: float = DROP_TOL) -> DegeneracyReport:
    offenders = tuple(J for J, s in dec.sigma2().items() if s > tol and len(J) != d)
    return DegeneracyReport(not offenders, d, offenders)


def reconstruction_residual(dec: HoeffdingDecomposition, w: Sequence[SubsetKernel], budget: int | None = DEFAULT_BUDGET) -> float:
    diff = dec.grid(budget) - grid_values(dec.space, w, budget)
    return float(np.max(np.abs(diff)))


def degeneracy_residual(dec: HoeffdingDecomposition) -> float:
    """max |E[W_J | F_{J minus j}]|; by the tower property this covers every K not containing J."""
    worst = 0.0
    for J, k in dec.components.items():
        for j in J:
            c = conditional_expectation(dec.space, k, [i for i in J if i != j])
            worst = max(worst, float(np.max(np.abs(c.values))))
    return worst


def orthogonality_residual(dec: HoeffdingDecomposition) -> float:
    """max |E[W_J W_K]| over distinct components."""
    worst = 0.0
    items = list(dec.components.items())
    for a, (_, ka) in enumerate(items):
        for _, kb in items[a + 1:]:
            worst = max(worst, abs(joint_moment(dec.space, [ka, kb], budget=None)))
    return worst


@dataclass(frozen=True)
class DegenerateUStatistic:
    """A Hoeffding decomposition supported on subsets of size ``order``."""

    order: int
    decomposition: HoeffdingDecomposition
    meta: Mapping = field(default_factory=dict, compare=False)

    @property
    def space(self) -> FiniteProductSpace:
        return self.decomposition.space

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def components(self) -> Mapping[tuple[int, ...], SubsetKernel]:
        return self.decomposition.components

    def sigma2(self) -> dict[tuple[int, ...], float]:
        return self.decomposition.sigma2()

    def variance(self) -> float:
        return self.decomposition.variance()

    def grid(self, budget: int | None = DEFAULT_BUDGET) -> np.ndarray:
        return self.decomposition.grid(budget)


def as_ustatistic(dec: HoeffdingDecomposition, d: int | None = None, meta: Mapping | None = None) -> DegenerateUStatistic:
    """Wrap a decomposition, inferring the order when it is not given."""
    if d is None:
        sizes = {len(J) for J in dec.components}
        if len(sizes) > 1:
            raise ModelError(f"components of several sizes {sorted(sizes)}; not a degenerate U-statistic")
        d = sizes.pop() if sizes else 1
    report = check_degenerate(dec, d)
    if not report:
        raise ModelError(f"not degenerate of order {d}: offending subsets {list(report.offenders)}")
    comps = {J: k for J, k in dec.components.items() if len(J) == d}
    return DegenerateUStatistic(d, HoeffdingDecomposition(dec.space, comps), dict(meta or {}))


def ustatistic(space: FiniteProductSpace, kernels: Sequence[SubsetKernel], d: int | None = None,
               budget: int | None = DEFAULT_BUDGET) -> DegenerateUStatistic:
    """Decompose raw kernels and wrap the result, failing if it is not degenerate."""
    return as_ustatistic(decompose(space, kernels, budget), d)


def rho_squared(u: DegenerateUStatistic) -> float:
    """max over coordinates i of the total component variance of subsets containing i."""
    load = [0.0] * (u.n + 1)
    for J, s in u.sigma2().items():
        for i in J:
            load[i] += s
    return max(load[1:])


def normalize(u: DegenerateUStatistic) -> DegenerateUStatistic:
    var = u.variance()
    if var <= 1e-12:
        raise NormalizationError(f"cannot normalize: variance {var!r} is zero")
    c = 1.0 / math.sqrt(var)
    return DegenerateUStatistic(u.order, u.decomposition.scaled(c), u.meta)


def is_normalized(u: DegenerateUStatistic, tol: float = 1e-9) -> bool:
    return abs(u.variance() - 1.0) <= tol


def mean(space: FiniteProductSpace, k: SubsetKernel) -> float:
    return expectation(space, k)


@dataclass(frozen=True)
class VectorModel:
    """Degenerate U-statistics W(1..r) over one space, with orders p_1 <= ... <= p_r."""

    components: tuple[DegenerateUStatistic, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ModelError("a vector model needs at least one component")
        space = comps[0].space
        for c in comps[1:]:
            if c.space != space:
                raise ModelError("vector model components must share one space")
        object.__setattr__(self, "components", comps)

    @property
    def space(self) -> FiniteProductSpace:
        return self.components[0].space

    @property
    def r(self) -> int:
        return len(self.components)

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(c.order for c in self.components)

    def __getitem__(self, i: int) -> DegenerateUStatistic:
        """1-based access, matching the W(i) labelling."""
        if not 1 <= i <= self.r:
            raise ModelError(f"component index {i} outside [1, {self.r}]")
        return self.components[i - 1]

    def is_sorted(self) -> bool:
        return all(a <= b for a, b in zip(self.orders, self.orders[1:]))

    def normalized(self) -> "VectorModel":
        return VectorModel(tuple(normalize(c) for c in self.components))
