"""Exact fourth and cross moments via enumeration of quadruples of Hoeffding components.

Quadruples with a free index (an element lying in exactly one of the four
subsets) have zero expectation, so they are pruned before any expectation is
computed. Subsets are handled as bitmasks (bit ``j - 1`` for coordinate ``j``).
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import ContractError
from .hoeffding import DegenerateUStatistic, VectorModel
from .space import DEFAULT_BUDGET, SubsetKernel, joint_moment


class Label(str, enum.Enum):
    FREE_INDEX = "FreeIndex"
    BIFOLD = "Bifold"
    T = "T"
    OTHER = "Other"


@dataclass(frozen=True)
class QuadrupleClass:
    label: Label
    quadruple: tuple[tuple[int, ...], ...]
    free: tuple[int, ...] = ()


def classify_quadruple(j1, j2, j3, j4) -> QuadrupleClass:
    quad = tuple(tuple(sorted(s)) for s in (j1, j2, j3, j4))
    if any(not s for s in quad):
        raise ContractError("quadruple subsets must be nonempty")
    mult: dict[int, int] = {}
    for s in quad:
        for e in s:
            mult[e] = mult.get(e, 0) + 1
    free = tuple(sorted(e for e, c in mult.items() if c == 1))
    if free:
        return QuadrupleClass(Label.FREE_INDEX, quad, free)
    if all(c == 2 for c in mult.values()):
        return QuadrupleClass(Label.BIFOLD, quad)
    if max(mult.values()) >= 3:
        return QuadrupleClass(Label.T, quad)
    raise AssertionError(f"unclassifiable quadruple {quad}")  # pragma: no cover


def to_mask(subset: Sequence[int]) -> int:
    m = 0
    for j in subset:
        m |= 1 << (j - 1)
    return m


def from_mask(mask: int) -> tuple[int, ...]:
    return tuple(b + 1 for b in range(mask.bit_length()) if mask >> b & 1)


def _add(state: tuple[int, int, int], s: int) -> tuple[int, int, int]:
    """Update (exactly once, exactly twice, three or more) multiplicity masks by one subset."""
    c1, c2, c3 = state
    seen = c1 | c2 | c3
    return (c1 & ~s) | (s & ~seen), (c2 & ~s) | (c1 & s), c3 | (c2 & s)


def _bits(mask: int) -> list[int]:
    return [1 << b for b in range(mask.bit_length()) if mask >> b & 1]


@dataclass(frozen=True)
class _Slot:
    masks: tuple[int, ...]
    size: int
    index: dict

    @classmethod
    def of(cls, u: DegenerateUStatistic) -> "_Slot":
        masks = tuple(to_mask(J) for J in u.components)
        return cls(masks, u.order, {m: a for a, m in enumerate(masks)})


def no_free_quadruples(slots: Sequence[_Slot]) -> Iterator[tuple[int, int, int, int, bool]]:
    """Yield ``(a, b, c, e, is_t)`` component indices of every quadruple with no free index.

    Iteration is lexicographic in (a, b, c) and then in the bit pattern of the fourth subset,
    so reductions over the output are reproducible.
    """
    s1, s2, s3, s4 = slots
    for a, m1 in enumerate(s1.masks):
        st1 = _add((0, 0, 0), m1)
        for b, m2 in enumerate(s2.masks):
            st2 = _add(st1, m2)
            if bin(st2[0]).count("1") > s3.size + s4.size:
                continue
            for c, m3 in enumerate(s3.masks):
                st3 = _add(st2, m3)
                ones = st3[0]
                k = s4.size - bin(ones).count("1")
                if k < 0:
                    continue
                rest = _bits((st3[1] | st3[2]))
                for extra in itertools.combinations(rest, k):
                    m4 = ones | sum(extra)
                    e = s4.index.get(m4)
                    if e is None:
                        continue
                    st4 = _add(st3, m4)
                    yield a, b, c, e, bool(st4[2])


def is_s0(j: int, k: int, l: int, m: int) -> bool:
    """Membership of (J, K, L, M) in the S_0 index set, on bitmasks."""
    if j & k or l & m:
        return False
    jl, jm = j & l, j & m
    return 0 != jl != j and 0 != jm != j


def is_s0_strict(j: int, k: int, l: int, m: int) -> bool:
    """The longer two-sided form of the S_0 condition.

    Agrees with :func:`is_s0` when |J| = |L|, |K| = |M| and no element is free.
    """
    if j & k or l & m:
        return False
    jl = j & l
    return 0 != jl != j and jl == j & ~(j & m) and 0 != jl != l and jl == l & ~(l & k)


@dataclass(frozen=True)
class QuadrupleSums:
    """Sums over (J, K, L, M) in D_p x D_q x D_p x D_q for the statistics (A, B, A, B)."""

    e22: float
    s0: float
    tau: float
    bifold_count: int
    t_count: int


def quadruple_sums(a: DegenerateUStatistic, b: DegenerateUStatistic, budget: int | None = DEFAULT_BUDGET,
                   with_moments: bool = True) -> QuadrupleSums:
    """E[A^2 B^2], S_0 and tau for the pattern (A, B, A, B) in one enumeration pass."""
    if a.space != b.space:
        raise ContractError("statistics must share one space")
    same = a is b
    sa, sb = _Slot.of(a), _Slot.of(b)
    ka, kb = list(a.components.values()), list(b.components.values())
    siga = [math.sqrt(max(s, 0.0)) for s in a.sigma2().values()]
    sigb = siga if same else [math.sqrt(max(s, 0.0)) for s in b.sigma2().values()]
    cache: dict[tuple, float] = {}

    def moment(i1, i2, i3, i4):
        tags = ((0, i1), (0 if same else 1, i2), (0, i3), (0 if same else 1, i4))
        key = tuple(sorted(tags))
        val = cache.get(key)
        if val is None:
            ks = [(ka if t == 0 else kb)[i] for t, i in key]
            val = cache[key] = joint_moment(a.space, ks, budget)
        return val

    e22, s0, tau = [], [], []
    nb = nt = 0
    for i1, i2, i3, i4, is_t in no_free_quadruples((sa, sb, sa, sb)):
        if is_t:
            nt += 1
            tau.append(siga[i1] * sigb[i2] * siga[i3] * sigb[i4])
        else:
            nb += 1
        if not with_moments:
            continue
        val = moment(i1, i2, i3, i4)
        e22.append(val)
        if is_s0(sa.masks[i1], sb.masks[i2], sa.masks[i3], sb.masks[i4]):
            s0.append(val)
    return QuadrupleSums(math.fsum(e22), math.fsum(s0), math.fsum(tau), nb, nt)


def fourth_moment(u: DegenerateUStatistic, budget: int | None = DEFAULT_BUDGET) -> float:
    return quadruple_sums(u, u, budget).e22


def s0(u: DegenerateUStatistic, budget: int | None = DEFAULT_BUDGET) -> float:
    return quadruple_sums(u, u, budget).s0


def tau(u: DegenerateUStatistic) -> float:
    return quadruple_sums(u, u, with_moments=False).tau


def covariance(a: DegenerateUStatistic, b: DegenerateUStatistic, budget: int | None = DEFAULT_BUDGET) -> float:
    """E[A B]; zero unless the orders agree, since components of different sizes are orthogonal."""
    if a.order != b.order:
        return 0.0
    terms = []
    for J, k in a.components.items():
        other: SubsetKernel | None = b.components.get(J)
        if other is not None:
            terms.append(joint_moment(a.space, [k, other], budget))
    return math.fsum(terms)


@dataclass(frozen=True)
class CrossMoments:
    e22: float
    v: float
    s0: float
    tau: float


def cross_moments(v: VectorModel, i: int, k: int, budget: int | None = DEFAULT_BUDGET) -> CrossMoments:
    """E[W(i)^2 W(k)^2], v_ik, S_0(i,k) and tau_{i,k} for 1 <= i <= k <= r."""
    if i > k:
        raise ContractError(f"cross_moments needs i <= k, got i={i}, k={k}")
    wi, wk = v[i], v[k]
    if i == k:
        wk = wi
    sums = quadruple_sums(wi, wk, budget)
    return CrossMoments(sums.e22, covariance(wi, wk, budget), sums.s0, sums.tau)


def sigma_overlap(a: DegenerateUStatistic, b: DegenerateUStatistic) -> float:
    """Sum of sigma_J(a)^2 sigma_K(b)^2 over pairs of intersecting subsets."""
    sa, sb = a.sigma2(), b.sigma2()
    ma = [(to_mask(J), s) for J, s in sa.items()]
    mb = [(to_mask(K), s) for K, s in sb.items()]
    return math.fsum(x * y for m, x in ma for mm, y in mb if m & mm)
