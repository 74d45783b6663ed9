"""Equivalence classes of quadruples of subsets under relabeling, and the constant C_d.

A shadow is a quadruple (F_1, F_2, F_3, F_4) of subsets of [r] whose union is [r],
where every element lies in at least two F_l and some element in at least three.
Two shadows are equivalent when a permutation of [r] maps one onto the other.

Each element of [r] has a membership type: the set of l with the element in F_l.
A class is determined by how many elements carry each type, so classes are
enumerated as integer count vectors instead of by searching S_r. The stabilizer
of a class permutes elements of equal type freely, giving gamma = prod(c_t!).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .errors import CapabilityError, ContractError
from .hoeffding import DegenerateUStatistic
from .moments import _Slot, no_free_quadruples

MAX_ORDER = 5

# Membership types as 4-bit masks (bit l for F_{l+1}); only elements lying in >= 2 sets are allowed.
TYPES = tuple(t for t in range(1, 16) if bin(t).count("1") >= 2)


@dataclass(frozen=True)
class ShadowClass:
    quadruple: tuple[int, int, int, int]
    r: int
    gamma: int
    counts: tuple[tuple[int, int], ...]
    sizes: tuple[int, int, int, int]

    @property
    def orbit_size(self) -> int:
        return math.factorial(self.r) // self.gamma

    def sets(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(a + 1 for a in range(self.r) if f >> a & 1) for f in self.quadruple)


def _member_key(t: int) -> tuple[int, ...]:
    return tuple(t >> l & 1 for l in range(4))


def representative(counts: dict[int, int]) -> tuple[tuple[int, int, int, int], int]:
    """Lexicographically least quadruple of bitsets realising the type counts.

    Elements are laid out in decreasing order of their membership vector (in F_1, F_2, F_3, F_4),
    which puts each F_l on the lowest available positions given the earlier sets.
    """
    layout = []
    for t in sorted(counts, key=_member_key, reverse=True):
        layout.extend([t] * counts[t])
    quad = [0, 0, 0, 0]
    for a, t in enumerate(layout):
        for l in range(4):
            if t >> l & 1:
                quad[l] |= 1 << a
    return tuple(quad), len(layout)


def _count_vectors(sizes: Sequence[int]) -> Iterator[dict[int, int]]:
    """All type-count vectors whose set sizes match ``sizes``."""
    sizes = list(sizes)

    def rec(idx: int, remaining: list[int], acc: dict[int, int]):
        if idx == len(TYPES):
            if not any(remaining):
                yield dict(acc)
            return
        t = TYPES[idx]
        members = [l for l in range(4) if t >> l & 1]
        cap = min(remaining[l] for l in members)
        for c in range(cap, -1, -1):
            if c:
                acc[t] = c
            for l in members:
                remaining[l] -= c
            yield from rec(idx + 1, remaining, acc)
            for l in members:
                remaining[l] += c
            acc.pop(t, None)

    yield from rec(0, sizes, {})


def _classes(sizes: tuple[int, int, int, int]) -> list[ShadowClass]:
    out = []
    for counts in _count_vectors(sizes):
        if not any(bin(t).count("1") >= 3 for t in counts):
            continue
        quad, r = representative(counts)
        gamma = math.prod(math.factorial(c) for c in counts.values())
        out.append(ShadowClass(quad, r, gamma, tuple(sorted(counts.items())), sizes))
    out.sort(key=lambda c: (c.r, c.quadruple))
    return out


def _check_order(d: int, cap: int) -> None:
    if not 1 <= d <= cap:
        raise CapabilityError(f"order {d} outside the supported range [1, {cap}]")


def enumerate_shadow_classes(d: int, cap: int = MAX_ORDER) -> list[ShadowClass]:
    """One canonical representative per class of d-shadows, sorted by (r, bitsets)."""
    _check_order(d, cap)
    classes = _classes((d, d, d, d))
    for c in classes:
        if not pairwise_intersecting(c):
            raise AssertionError(f"d-shadow {c.sets()} has two disjoint sets")  # pragma: no cover
    return classes


def enumerate_mixed_shadow_classes(p: int, q: int, cap: int = MAX_ORDER) -> list[ShadowClass]:
    """Classes of (p, q)-shadows with |F_1| = |F_3| = p and |F_2| = |F_4| = q."""
    _check_order(p, cap)
    _check_order(q, cap)
    return _classes((p, q, p, q))


def pairwise_intersecting(c: ShadowClass) -> bool:
    return all(a & b for a, b in itertools.combinations(c.quadruple, 2))


def shadow_constant(classes: Sequence[ShadowClass], d: int) -> Fraction:
    return math.factorial(d) * math.factorial(d - 1) * sum((Fraction(1, c.gamma) for c in classes), Fraction(0))


def compute_Cd(d: int, cap: int = MAX_ORDER) -> float:
    """d! (d-1)! times the sum of 1/gamma over all classes of d-shadows."""
    return float(shadow_constant(enumerate_shadow_classes(d, cap), d))


def kappa(d: int, c_d: float | None = None) -> float:
    """kappa_d = C_d + 2d."""
    return (compute_Cd(d) if c_d is None else c_d) + 2 * d


# Brute-force helpers over S_r, used to cross-check the type-count construction.

def relabel(quad: Sequence[int], perm: Sequence[int]) -> tuple[int, ...]:
    """Apply element map a -> perm[a] to every bitset."""
    out = []
    for f in quad:
        g = 0
        for a, b in enumerate(perm):
            if f >> a & 1:
                g |= 1 << b
        out.append(g)
    return tuple(out)


def brute_canonical(quad: Sequence[int], r: int) -> tuple[int, ...]:
    return min(relabel(quad, p) for p in itertools.permutations(range(r)))


def brute_stabilizer(quad: Sequence[int], r: int) -> int:
    quad = tuple(quad)
    return sum(1 for p in itertools.permutations(range(r)) if relabel(quad, p) == quad)


def brute_orbit(quad: Sequence[int], r: int) -> set[tuple[int, ...]]:
    return {relabel(quad, p) for p in itertools.permutations(range(r))}


def canonical_shadow(quadruple: Sequence[Sequence[int]]) -> tuple[tuple[int, int, int, int], int]:
    """Canonical bitsets of the shadow induced by a quadruple of subsets of [n]."""
    counts: dict[int, int] = {}
    for e in sorted(set().union(*map(set, quadruple))):
        t = sum(1 << l for l, s in enumerate(quadruple) if e in s)
        counts[t] = counts.get(t, 0) + 1
    return representative(counts)


def is_shadow(quad: Sequence[int], r: int) -> bool:
    mult = [sum(f >> a & 1 for f in quad) for a in range(r)]
    return bool(mult) and min(mult) >= 2 and max(mult) >= 3


def tau_by_class(u: DegenerateUStatistic) -> dict[tuple[int, int, int, int], float]:
    """Split tau into the contributions of the quadruples inducing each shadow class."""
    slot = _Slot.of(u)
    subsets = list(u.components)
    sig = [math.sqrt(max(s, 0.0)) for s in u.sigma2().values()]
    acc: dict[tuple[int, int, int, int], list[float]] = {}
    for a, b, c, e, is_t in no_free_quadruples((slot, slot, slot, slot)):
        if not is_t:
            continue
        key, _ = canonical_shadow([subsets[i] for i in (a, b, c, e)])
        acc.setdefault(key, []).append(sig[a] * sig[b] * sig[c] * sig[e])
    return {k: math.fsum(v) for k, v in acc.items()}


def class_table(classes: Sequence[ShadowClass]) -> list[dict]:
    if any(c.sizes != classes[0].sizes for c in classes):
        raise ContractError("class table needs classes of one size pattern")
    return [{"r": c.r, "sets": [list(s) for s in c.sets()], "gamma": c.gamma, "orbit": c.orbit_size} for c in classes]
