"""Exchangeable pair that re-draws one uniformly chosen coordinate, computed exactly.

Given X, the pair picks a coordinate j uniformly from [n] and replaces X_j by an
independent copy. Every quantity here averages over j and the replacement value
instead of sampling, so identities can be checked to rounding precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import ContractError
from .hoeffding import DegenerateUStatistic, HoeffdingDecomposition
from .moments import fourth_moment
from .product import hoeffding_product
from .space import DEFAULT_BUDGET, FiniteProductSpace, check_budget, grid_expectation

DIRECT_BUDGET = 2**22
THIRD_MOMENT_FACTOR = 2 * math.sqrt(2) / 3


def coefficient(size: int, d: int) -> float:
    """a_M = 1 - |M| / (2d)."""
    if not 0 <= size <= 2 * d:
        raise ContractError(f"|M| = {size} outside [0, {2 * d}]")
    return 1.0 - size / (2 * d)


def _grid(x, budget) -> np.ndarray:
    dec = x.decomposition if isinstance(x, DegenerateUStatistic) else x
    return dec.grid(budget)


def _replacement_means(space: FiniteProductSpace, table: np.ndarray, power: int = 1) -> list[np.ndarray]:
    out = []
    for j in range(1, space.n + 1):
        m = np.tensordot(table**power, space.probs(j), axes=([j - 1], [0]))
        out.append(np.expand_dims(m, j - 1))
    return out


def regression_residual(space: FiniteProductSpace, table: np.ndarray, d: int) -> float:
    """max over atoms of |E[W' - W | X] + (d/n) W| for W given on the full grid."""
    n = space.n
    cond = sum(_replacement_means(space, table)) / n
    return float(np.max(np.abs(cond - table + (d / n) * table)))


def regression_check(u, d: int | None = None, budget: int | None = DEFAULT_BUDGET) -> float:
    """Regression residual of a statistic; ``d`` defaults to the order of ``u``."""
    if d is None:
        if not isinstance(u, DegenerateUStatistic):
            raise ContractError("order d is required for a raw decomposition")
        d = u.order
    return regression_residual(u.space, _grid(u, budget), d)


def conditional_squared_increment(u: DegenerateUStatistic, budget: int | None = DEFAULT_BUDGET) -> np.ndarray:
    """(n/2d) E[(W' - W)^2 | X] at every atom, by direct averaging."""
    space, d = u.space, u.order
    g = u.grid(budget)
    m1 = _replacement_means(space, g)
    m2 = _replacement_means(space, g, 2)
    total = sum(b - 2 * g * a + g * g for a, b in zip(m1, m2))
    return total / (2 * d)


@dataclass(frozen=True)
class SquaredIncrement:
    """sum over |M| <= 2d-1 of a_M U_M, with U the Hoeffding components of W^2."""

    decomposition: HoeffdingDecomposition
    coefficients: Mapping[tuple[int, ...], float]
    square: HoeffdingDecomposition


def squared_increment_decomposition(u: DegenerateUStatistic, square: HoeffdingDecomposition | None = None,
                                    budget: int | None = DEFAULT_BUDGET) -> SquaredIncrement:
    d = u.order
    if square is None:
        square = hoeffding_product(u, u, budget)
    coeffs, comps = {}, {}
    for M, k in square.components.items():
        if len(M) <= 2 * d - 1:
            a = coefficient(len(M), d)
            coeffs[M] = a
            if a != 0.0:
                comps[M] = k.scaled(a)
    return SquaredIncrement(HoeffdingDecomposition(u.space, comps), coeffs, square)


def squared_increment_residual(u: DegenerateUStatistic, inc: SquaredIncrement | None = None,
                               budget: int | None = DEFAULT_BUDGET) -> float:
    inc = inc or squared_increment_decomposition(u, budget=budget)
    diff = inc.decomposition.grid(budget) - conditional_squared_increment(u, budget)
    return float(np.max(np.abs(diff)))


def _pair_moment(u: DegenerateUStatistic, f, budget: int | None) -> float:
    """E[f(W' - W)] averaged over the coordinate choice and replacement, by full enumeration."""
    space = u.space
    g = u.grid(budget)
    full = tuple(range(1, space.n + 1))
    terms = []
    for j in full:
        check_budget(space, full, budget, factor=space.size(j))
        p = space.probs(j)
        t = np.moveaxis(g, j - 1, -1)
        diff = t[..., None, :] - t[..., :, None]
        inner = np.tensordot(f(diff), p, axes=([-1], [0]))
        inner = np.moveaxis(inner, -1, j - 1)
        terms.append(grid_expectation(space, inner))
    return math.fsum(terms) / space.n


def fourth_increment_direct(u: DegenerateUStatistic, budget: int | None = DIRECT_BUDGET) -> float:
    """(n/4d) E[(W' - W)^4] by enumeration over (atom, coordinate, replacement)."""
    return u.n / (4 * u.order) * _pair_moment(u, lambda x: x**4, budget)


def third_increment_exact(u: DegenerateUStatistic, budget: int | None = DIRECT_BUDGET) -> float:
    """(1/3 lambda) E|W' - W|^3 with lambda = d/n, by full enumeration."""
    return u.n / (3 * u.order) * _pair_moment(u, lambda x: np.abs(x) ** 3, budget)


def third_increment_bound(fourth_inc: float) -> float:
    """Cauchy-Schwarz bound (2 sqrt 2 / 3) sqrt((n/4d) E[(W'-W)^4]) on (1/3 lambda) E|W'-W|^3."""
    return THIRD_MOMENT_FACTOR * math.sqrt(max(fourth_inc, 0.0))


@dataclass(frozen=True)
class PairQuantities:
    lam: float
    coefficients: Mapping[tuple[int, ...], float]
    fourth_moment: float
    lower_order_variance: float
    var_squared_increment: float
    fourth_increment: float
    third_increment_bound: float
    third_increment_exact: float | None = None


def pair_quantities(u: DegenerateUStatistic, budget: int | None = DEFAULT_BUDGET, exact_third: bool = False,
                    e4: float | None = None, square: HoeffdingDecomposition | None = None) -> PairQuantities:
    """Exact pair summaries from the Hoeffding components of W^2.

    With G = (n/2d) E[(W'-W)^2 | X] = sum a_M U_M, orthogonality gives
    Var(G) = sum_{M nonempty} a_M^2 E[U_M^2] and E[W^2 G] = sum_M a_M E[U_M^2],
    hence (n/4d) E[(W'-W)^4] = 3 E[W^2 G] - E[W^4].
    """
    d = u.order
    inc = squared_increment_decomposition(u, square, budget)
    sq = inc.square.sigma2()
    e4 = fourth_moment(u, budget) if e4 is None else e4
    lower = math.fsum(s for M, s in sq.items() if 1 <= len(M) <= 2 * d - 1)
    var_g = math.fsum(coefficient(len(M), d) ** 2 * s for M, s in sq.items() if 1 <= len(M) <= 2 * d - 1)
    e_w2g = math.fsum(coefficient(len(M), d) * s for M, s in sq.items() if len(M) <= 2 * d - 1)
    fourth_inc = 3 * e_w2g - e4
    exact = third_increment_exact(u) if exact_third else None
    return PairQuantities(d / u.n, dict(inc.coefficients), e4, lower, var_g, fourth_inc,
                          third_increment_bound(fourth_inc), exact)


def fourth_increment(u: DegenerateUStatistic, budget: int | None = DEFAULT_BUDGET) -> float:
    return pair_quantities(u, budget).fourth_increment
