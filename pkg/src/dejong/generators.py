"""Built-in model families: homogeneous sums, symmetric and weighted U-statistics, random instances."""

from __future__ import annotations

import itertools
import math
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from .errors import ContractError, ModelError
from .hoeffding import (
    DegenerateUStatistic,
    HoeffdingDecomposition,
    VectorModel,
    as_ustatistic,
    kernel_components,
    normalize,
)
from .space import Coordinate, FiniteProductSpace, SubsetKernel

LAW_TOL = 1e-12

Kernel = Union[Callable[..., float], np.ndarray, Sequence[float]]


def _check_standardized(law: Coordinate) -> None:
    mean, second = law.moment(1), law.moment(2)
    if abs(mean) > LAW_TOL or abs(second - 1) > LAW_TOL:
        raise ContractError(f"coordinate law must be centered with unit variance (mean {mean!r}, E[X^2] {second!r})")


def _tabulate(law: Coordinate, d: int, g: Kernel) -> np.ndarray:
    shape = (law.size,) * d
    if callable(g):
        flat = [g(*xs) for xs in itertools.product(law.support, repeat=d)]
        return np.array(flat, dtype=float).reshape(shape)
    table = np.asarray(g, dtype=float)
    if table.size != math.prod(shape):
        raise ModelError(f"kernel table needs {math.prod(shape)} values, got {table.size}")
    return table.reshape(shape)


def homogeneous_sum(n: int, d: int, coefficients: Mapping[Sequence[int], float], law: Coordinate | None = None) -> DegenerateUStatistic:
    """W = sum over d-subsets J of a_J prod_{j in J} X_j, with X_j i.i.d. centered and standardized."""
    law = law or Coordinate.rademacher()
    _check_standardized(law)
    space = FiniteProductSpace.iid(n, law)
    x = np.array(law.support)
    comps = {}
    for J, a in coefficients.items():
        J = tuple(sorted(J))
        if len(J) != d or len(set(J)) != d:
            raise ModelError(f"coefficient subset {J} is not a {d}-subset")
        if a == 0:
            continue
        table = np.array(float(a))
        for _ in J:
            table = np.multiply.outer(table, x)
        comps[J] = SubsetKernel.from_flat(space, J, table.ravel())
    return DegenerateUStatistic(d, HoeffdingDecomposition(space, comps), {"generator": "homogeneous"})


def balanced_coefficients(n: int, d: int) -> dict[tuple[int, ...], float]:
    """Equal coefficients over all d-subsets of [n], with squares summing to 1."""
    subsets = list(itertools.combinations(range(1, n + 1), d))
    a = 1 / math.sqrt(len(subsets))
    return {J: a for J in subsets}


def random_coefficients(n: int, d: int, rng: np.random.Generator) -> dict[tuple[int, ...], float]:
    """Gaussian coefficients over all d-subsets, rescaled so their squares sum to 1."""
    subsets = list(itertools.combinations(range(1, n + 1), d))
    a = rng.standard_normal(len(subsets))
    a /= math.sqrt(float(np.sum(a * a)))
    return dict(zip(subsets, a.tolist()))


def top_component(law: Coordinate, d: int, g: Kernel) -> tuple[np.ndarray, bool]:
    """Top-order Hoeffding component of g(x_1..x_d) under i.i.d. ``law``; flag if lower components were removed."""
    space = FiniteProductSpace.iid(d, law)
    k = SubsetKernel(tuple(range(1, d + 1)), _tabulate(law, d, g))
    parts = kernel_components(space, k)
    top = parts[-1].values
    projected = bool(np.max(np.abs(top - k.values)) > 1e-12)
    return top, projected


def symmetric_ustat(n: int, d: int, g: Kernel, law: Coordinate | None = None) -> DegenerateUStatistic:
    """Normalized sum over all d-subsets of the common kernel g, projected to its degenerate part."""
    law = law or Coordinate.rademacher()
    if not 1 <= d <= n:
        raise ModelError(f"need 1 <= d <= n, got d={d}, n={n}")
    top, projected = top_component(law, d, g)
    space = FiniteProductSpace.iid(n, law)
    comps = {J: SubsetKernel(J, top) for J in itertools.combinations(range(1, n + 1), d)}
    u = DegenerateUStatistic(d, HoeffdingDecomposition(space, comps), {"generator": "symmetric", "projected": projected})
    return normalize(u)


def weighted_ustat(n: int, weights, psi: Kernel, law: Coordinate | None = None) -> DegenerateUStatistic:
    """sum over i < j of w_ij psi(X_i, X_j) for a symmetric degenerate psi; not normalized."""
    law = law or Coordinate.rademacher()
    table = _tabulate(law, 2, psi)
    if np.max(np.abs(table - table.T)) > 1e-12:
        raise ContractError("psi must be symmetric")
    p = np.array(law.probs)
    if np.max(np.abs(table @ p)) > 1e-12:
        raise ContractError("psi must be degenerate: E[psi(x, Y)] = 0 for every x")
    w = np.asarray(weights, dtype=float)
    if w.shape != (n, n):
        raise ModelError(f"weights must be an {n} x {n} matrix")
    space = FiniteProductSpace.iid(n, law)
    comps = {}
    for i, j in itertools.combinations(range(1, n + 1), 2):
        wij = w[i - 1, j - 1]
        if wij != 0:
            comps[(i, j)] = SubsetKernel((i, j), wij * table)
    return DegenerateUStatistic(2, HoeffdingDecomposition(space, comps), {"generator": "weighted"})


def random_space(rng: np.random.Generator, n: int, max_support: int = 3) -> FiniteProductSpace:
    coords = []
    for _ in range(n):
        m = int(rng.integers(1, max_support + 1))
        support = np.sort(rng.choice(np.arange(-5, 6), size=m, replace=False)).astype(float)
        probs = rng.uniform(0.2, 1.0, size=m)
        probs = probs / probs.sum()
        probs[-1] = 1.0 - probs[:-1].sum()
        coords.append(Coordinate(tuple(support), tuple(probs)))
    return FiniteProductSpace(tuple(coords))


def random_instance(rng: np.random.Generator, n_max: int = 5, d_max: int = 2, max_support: int = 3,
                    normalized: bool = True, max_tries: int = 50) -> DegenerateUStatistic:
    """A random degenerate U-statistic: random kernels on random d-subsets, projected to order d.

    Coordinates with a single atom cannot carry a degenerate component, so the draw is
    repeated until the projected statistic has positive variance.
    """
    for _ in range(max_tries):
        n = int(rng.integers(2, n_max + 1))
        d = int(rng.integers(1, min(d_max, n) + 1))
        space = random_space(rng, n, max_support)
        subsets = list(itertools.combinations(range(1, n + 1), d))
        count = int(rng.integers(1, len(subsets) + 1))
        chosen = [subsets[i] for i in sorted(rng.choice(len(subsets), size=count, replace=False))]
        comps = {}
        for J in chosen:
            k = SubsetKernel(J, rng.standard_normal(space.shape(J)))
            top = kernel_components(space, k)[-1]
            comps[J] = top
        dec = HoeffdingDecomposition(space, comps)
        dec = HoeffdingDecomposition(space, {J: k for J, k in dec.components.items()
                                             if float(np.sum(k.values**2)) > 1e-12})
        if not dec.components or dec.variance() <= 1e-8:
            continue
        u = as_ustatistic(dec, d)
        return normalize(u) if normalized else u
    raise ModelError("could not draw a nondegenerate random instance")


def random_vector_instance(rng: np.random.Generator, orders: Sequence[int], n: int, max_support: int = 3):
    """Vector model over one random space with the given (sorted) orders, each component normalized."""
    for _ in range(50):
        space = random_space(rng, n, max_support)
        comps = []
        for d in orders:
            subsets = list(itertools.combinations(range(1, n + 1), d))
            count = int(rng.integers(1, len(subsets) + 1))
            chosen = [subsets[i] for i in sorted(rng.choice(len(subsets), size=count, replace=False))]
            kernels = {}
            for J in chosen:
                top = kernel_components(space, SubsetKernel(J, rng.standard_normal(space.shape(J))))[-1]
                if float(np.sum(top.values**2)) > 1e-12:
                    kernels[J] = top
            dec = HoeffdingDecomposition(space, kernels)
            if not kernels or dec.variance() <= 1e-8:
                break
            comps.append(normalize(DegenerateUStatistic(d, dec)))
        else:
            return VectorModel(tuple(comps))
    raise ModelError("could not draw a nondegenerate random vector instance")
