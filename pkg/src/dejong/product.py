"""Hoeffding decomposition of a product of two degenerate U-statistics."""

from __future__ import annotations

from typing import Union

import numpy as np

from .errors import ContractError
from .hoeffding import DROP_TOL, DegenerateUStatistic, HoeffdingDecomposition, decompose, merge, subsets_of
from .space import DEFAULT_BUDGET, SubsetKernel, check_budget, conditional_expectation, multiply, union

Decomposable = Union[DegenerateUStatistic, HoeffdingDecomposition]


def _dec(x: Decomposable) -> HoeffdingDecomposition:
    return x.decomposition if isinstance(x, DegenerateUStatistic) else x


def pair_contributions(j: SubsetKernel, k: SubsetKernel, space) -> list[SubsetKernel]:
    """Contributions of W_J V_K to each U_M, M = (J sym-diff K) plus a subset A of J & K.

    U_M receives sum over D <= L <= M of (-1)^{|M|-|L|} E[W_J V_K | F_L].
    """
    J, K = set(j.subset), set(k.subset)
    sym = sorted(J ^ K)
    inter = sorted(J & K)
    prod = multiply([j, k])
    cond = {B: conditional_expectation(space, prod, sorted(set(sym) | set(B))) for B in subsets_of(inter)}
    out = []
    for A in subsets_of(inter):
        M = tuple(sorted(set(sym) | set(A)))
        table = np.zeros(space.shape(M))
        for B in subsets_of(A):
            sign = -1.0 if (len(A) - len(B)) % 2 else 1.0
            table = table + sign * cond[B].aligned(M)
        out.append(SubsetKernel(M, table))
    return out


def hoeffding_product(v: Decomposable, w: Decomposable, budget: int | None = DEFAULT_BUDGET,
                      drop_tol: float = DROP_TOL) -> HoeffdingDecomposition:
    """Components U_M of the product V W, assembled pair by pair from the components of each factor."""
    dv, dw = _dec(v), _dec(w)
    if dv.space != dw.space:
        raise ContractError("factors must share one space")
    space = dv.space
    parts = []
    for j in dv.kernels():
        for k in dw.kernels():
            check_budget(space, union([j.subset, k.subset]), budget)
            parts.extend(pair_contributions(j, k, space))
    return merge(space, parts, drop_tol)


def product_oracle(v: Decomposable, w: Decomposable, budget: int | None = DEFAULT_BUDGET,
                   drop_tol: float = DROP_TOL) -> HoeffdingDecomposition:
    """Multiply the two functions on the union of their coordinates, then decompose from scratch."""
    dv, dw = _dec(v), _dec(w)
    space = dv.space
    target = union([k.subset for k in dv.kernels()] + [k.subset for k in dw.kernels()])
    check_budget(space, target, budget, factor=2 ** len(target))
    shape = space.shape(target)
    fv = np.zeros(shape)
    for k in dv.kernels():
        fv = fv + k.aligned(target)
    fw = np.zeros(shape)
    for k in dw.kernels():
        fw = fw + k.aligned(target)
    return decompose(space, [SubsetKernel(target, fv * fw)], budget=None, drop_tol=drop_tol)


def max_component_difference(a: HoeffdingDecomposition, b: HoeffdingDecomposition) -> float:
    """max over subsets and atoms of |a_M - b_M|, a missing component counting as zero."""
    worst = 0.0
    for M in set(a.components) | set(b.components):
        ka, kb = a.get(M), b.get(M)
        ta = ka.values if ka is not None else 0.0
        tb = kb.values if kb is not None else 0.0
        diff = np.abs(np.asarray(ta) - np.asarray(tb))
        worst = max(worst, float(np.max(diff)) if np.ndim(diff) else float(diff))
    return worst
