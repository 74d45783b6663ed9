"""Wasserstein-type error bounds for normalized degenerate U-statistics and vectors of them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ContractError, PositiveDefinitenessError
from .hoeffding import DegenerateUStatistic, VectorModel, is_normalized, rho_squared
from .moments import cross_moments, fourth_moment
from .pair import pair_quantities
from .shadows import compute_Cd
from .space import DEFAULT_BUDGET

SQRT_2_OVER_PI = math.sqrt(2 / math.pi)
TERM2_FACTOR = 2 * math.sqrt(2) / 3
CLAMP_TOL = 1e-9
MODES = ("cd-rho", "exact")


def _radicand(x: float) -> tuple[float, bool]:
    """Clamp a theoretically nonnegative quantity; the flag marks a negative value beyond rounding."""
    return max(x, 0.0), x < -CLAMP_TOL


@dataclass(frozen=True)
class FormulaTerms:
    term1: float
    term2: float
    total: float
    simplified: float
    inconsistent: bool


def formula_terms(gap: float, rho2: float, kappa: float) -> FormulaTerms:
    """Closed-form bound from the fourth-cumulant gap E[W^4]-3, rho^2 and kappa_d.

    total = sqrt(2/pi) sqrt(gap + kappa rho^2) + (2 sqrt 2 / 3) sqrt(2 gap + 3 kappa rho^2), and the
    simplified form (sqrt(2/pi) + 4/3) sqrt|gap| + sqrt(kappa) (sqrt(2/pi) + 2 sqrt 2 / sqrt 3) rho.
    """
    r1, bad1 = _radicand(gap + kappa * rho2)
    r2, bad2 = _radicand(2 * gap + 3 * kappa * rho2)
    t1 = SQRT_2_OVER_PI * math.sqrt(r1)
    t2 = TERM2_FACTOR * math.sqrt(r2)
    simplified = (SQRT_2_OVER_PI + 4 / 3) * math.sqrt(abs(gap)) + math.sqrt(kappa) * (
        SQRT_2_OVER_PI + 2 * math.sqrt(2) / math.sqrt(3)) * math.sqrt(max(rho2, 0.0))
    return FormulaTerms(t1, t2, t1 + t2, simplified, bad1 or bad2)


def plugin_univariate(var_term: float, third_term: float) -> float:
    """sqrt(2/pi) sqrt(Var((1/2 lambda) E[(W'-W)^2 | G])) + (1/3 lambda) E|W'-W|^3."""
    if var_term < 0 or third_term < 0:
        raise ContractError("plug-in inputs must be nonnegative")
    return SQRT_2_OVER_PI * math.sqrt(var_term) + third_term


@dataclass(frozen=True)
class UnivariateBoundReport:
    mode: str
    d: int
    n: int
    fourth_moment: float
    gap: float
    rho2: float
    c_d: float
    kappa: float
    term1: float
    term2: float
    total: float
    simplified: float
    exact_var: float
    exact_third: float
    exact_total: float
    lower_order_variance: float
    fourth_increment: float
    inconsistent: bool

    @property
    def bound(self) -> float:
        return self.total if self.mode == "cd-rho" else self.exact_total


def univariate_bound(u: DegenerateUStatistic, mode: str = "cd-rho", c_d: float | None = None,
                     budget: int | None = DEFAULT_BUDGET, exact_third: bool = False) -> UnivariateBoundReport:
    """Bound on d_Wass(W, Z) for a normalized degenerate U-statistic.

    Both the closed form in (E[W^4]-3, rho^2, kappa_d) and the plug-in bound with exact
    pair ingredients are computed; ``mode`` selects which one :attr:`bound` reports.
    """
    if mode not in MODES:
        raise ContractError(f"unknown mode {mode!r}; expected one of {MODES}")
    if not is_normalized(u):
        raise ContractError(f"bound needs unit variance, got {u.variance()!r}")
    d = u.order
    c = compute_Cd(d) if c_d is None else float(c_d)
    kappa = c + 2 * d
    e4 = fourth_moment(u, budget)
    gap = e4 - 3
    rho2 = rho_squared(u)
    terms = formula_terms(gap, rho2, kappa)
    pq = pair_quantities(u, budget, exact_third=exact_third, e4=e4)
    var_g, bad_v = _radicand(pq.var_squared_increment)
    third = pq.third_increment_exact if exact_third else pq.third_increment_bound
    return UnivariateBoundReport(
        mode, d, u.n, e4, gap, rho2, c, kappa, terms.term1, terms.term2, terms.total, terms.simplified,
        var_g, third, plugin_univariate(var_g, third), pq.lower_order_variance, pq.fourth_increment,
        terms.inconsistent or bad_v,
    )


# Multivariate.

@dataclass(frozen=True)
class Smoothness:
    """Caller-supplied smoothness constants of a test function h."""

    m1: float = 0.0
    m2: float = 0.0
    m2_tilde: float = 0.0
    m3: float = 0.0

    def __post_init__(self):
        if min(self.m1, self.m2, self.m2_tilde, self.m3) < 0:
            raise ContractError("smoothness constants must be nonnegative")


def gaussian_square_moment(v: float) -> float:
    """E[Z_i^2 Z_k^2] for standard Gaussians with covariance v."""
    return 1 + 2 * v * v


@dataclass(frozen=True)
class PairIngredients:
    i: int
    k: int
    e22: float
    v: float
    s0: float
    tau: float
    rho2_i: float
    rho2_k: float
    term: float


@dataclass(frozen=True)
class MultivariateBoundReport:
    A: float
    orders: tuple[int, ...]
    blocks: tuple[tuple[int, ...], ...]
    V: np.ndarray
    min_eigenvalue: float
    fourth_moments: tuple[float, ...]
    rho2: tuple[float, ...]
    c_q: Mapping[int, float]
    pairs: tuple[PairIngredients, ...]
    sigma_term: float
    inconsistent: bool
    coefficients: Mapping[str, float] = field(default_factory=dict)

    @property
    def v_inv_half_norm(self) -> float:
        if self.min_eigenvalue <= 1e-10:
            raise PositiveDefinitenessError(f"V has minimum eigenvalue {self.min_eigenvalue!r}")
        return 1 / math.sqrt(self.min_eigenvalue)


def _blocks(orders: Sequence[int]) -> tuple[tuple[int, ...], ...]:
    out: dict[int, list[int]] = {}
    for i, p in enumerate(orders, start=1):
        out.setdefault(p, []).append(i)
    return tuple(tuple(v) for _, v in sorted(out.items()))


def multivariate_A(v: VectorModel, mode: str = "exact-tau", c_q: Mapping[int, float] | None = None,
                   budget: int | None = DEFAULT_BUDGET) -> MultivariateBoundReport:
    """Quantity A with exact tau_{i,k} in place of C_{i,k} max(rho_i^2, rho_k^2)."""
    if mode != "exact-tau":
        raise ContractError(f"unknown mode {mode!r}; only 'exact-tau' is supported")
    if not v.is_sorted():
        raise ContractError(f"orders {v.orders} are not sorted")
    for i, w in enumerate(v.components, start=1):
        if not is_normalized(w):
            raise ContractError(f"component {i} has variance {w.variance()!r}, not 1")
    orders = v.orders
    blocks = _blocks(orders)
    qs = [orders[b[0] - 1] for b in blocks]
    q1 = qs[0]
    consts = {q: (c_q[q] if c_q and q in c_q else compute_Cd(q)) for q in qs}
    e4 = tuple(fourth_moment(w, budget) for w in v.components)
    rho2 = tuple(rho_squared(w) for w in v.components)
    r = v.r

    cm = {}
    for i in range(1, r + 1):
        for k in range(i, r + 1):
            cm[i, k] = cross_moments(v, i, k, budget)
    V = np.eye(r)
    for (i, k), c in cm.items():
        V[i - 1, k - 1] = V[k - 1, i - 1] = c.v if i != k else 1.0

    bad = False
    pairs = []
    total = []
    for l, block in enumerate(blocks):
        q = qs[l]
        weight = 4 * q * q / (q1 * q1)
        for i in block:
            for k in block:
                c = cm[min(i, k), max(i, k)]
                t = (c.e22 - gaussian_square_moment(c.v) + q * min(rho2[i - 1], rho2[k - 1])
                     + q * math.sqrt(rho2[i - 1] * rho2[k - 1]) + c.tau)
                total.append(weight * t)
                if i <= k:
                    pairs.append(PairIngredients(i, k, c.e22, c.v, c.s0, c.tau, rho2[i - 1], rho2[k - 1], t))
    for l in range(len(blocks)):
        for m in range(l + 1, len(blocks)):
            ql, qm = qs[l], qs[m]
            weight = 2 * (ql + qm) ** 2 / (q1 * q1)
            for i in blocks[l]:
                for k in blocks[m]:
                    c = cm[i, k]
                    left, b1 = _radicand(e4[i - 1] - 1)
                    right, b2 = _radicand(e4[k - 1] - 3 + (2 * qm + consts[qm]) * rho2[k - 1])
                    bad = bad or b1 or b2
                    t = (math.sqrt(left) * math.sqrt(right) + min(ql * rho2[k - 1], qm * rho2[i - 1]) + c.tau)
                    total.append(weight * t)
                    pairs.append(PairIngredients(i, k, c.e22, c.v, c.s0, c.tau, rho2[i - 1], rho2[k - 1], t))

    sig = []
    for l, block in enumerate(blocks):
        q = qs[l]
        for i in block:
            x, b = _radicand(2 * (e4[i - 1] - 3) + 3 * (consts[q] + 2 * q) * rho2[i - 1])
            bad = bad or b
            sig.append(q / q1 * math.sqrt(x))
    A = math.fsum(total)
    bad = bad or A < -CLAMP_TOL
    lam = min_eigenvalue_sym(V)
    return MultivariateBoundReport(A, orders, blocks, V, lam, e4, rho2, consts, tuple(pairs), math.fsum(sig), bad)


@dataclass(frozen=True)
class MultivariateBounds:
    bound_i: float
    bound_ii: float | None
    coefficients: Mapping[str, float]


def multivariate_bound(v: VectorModel, report: MultivariateBoundReport, smoothness: Smoothness,
                       require_ii: bool = False) -> MultivariateBounds:
    """Bounds (i) and (ii) on |E h(W) - E h(Z)| from the assembled report.

    (ii) needs V positive definite; it is ``None`` otherwise unless ``require_ii`` is set,
    in which case a positive-definiteness error is raised.
    """
    r = v.r
    q1 = report.orders[0]
    sqrt_a = math.sqrt(max(report.A, 0.0))
    coeffs = {
        "i.M2tilde": sqrt_a / (4 * q1),
        "i.M3": math.sqrt(2 * r) / 9 * report.sigma_term,
    }
    bound_i = coeffs["i.M2tilde"] * smoothness.m2_tilde + coeffs["i.M3"] * smoothness.m3
    bound_ii = None
    if report.min_eigenvalue > 1e-10:
        norm = report.v_inv_half_norm
        coeffs["ii.V_inv_half_norm"] = norm
        coeffs["ii.M1"] = norm * sqrt_a / (math.sqrt(2 * math.pi) * q1)
        coeffs["ii.M2"] = norm * math.sqrt(math.pi * r) / 6 * report.sigma_term
        bound_ii = coeffs["ii.M1"] * smoothness.m1 + coeffs["ii.M2"] * smoothness.m2
    elif require_ii:
        raise PositiveDefinitenessError(f"V has minimum eigenvalue {report.min_eigenvalue!r}")
    return MultivariateBounds(bound_i, bound_ii, coeffs)


def plugin_multivariate(op_lambda_inv: float, e_r: float, e_s_hs: float, e_dw3: float,
                        sigma_inv_half: float | None, smoothness: Smoothness, variant: str = "a") -> float:
    """Generic exchangeable-pair bound for vectors.

    (a): ||L^-1|| (M1 E||R|| + M2tilde E||S||_HS / 4 + M3 E||W'-W||^3 / 18)
    (b): M1 ||L^-1|| (E||R|| + ||S^-1/2|| E||S||_HS / sqrt(2 pi)) + sqrt(2 pi)/24 M2 ||L^-1|| ||S^-1/2|| E||W'-W||^3
    """
    vals = [op_lambda_inv, e_r, e_s_hs, e_dw3] + ([sigma_inv_half] if sigma_inv_half is not None else [])
    if min(vals) < 0:
        raise ContractError("plug-in inputs must be nonnegative")
    s = smoothness
    if variant == "a":
        return op_lambda_inv * (s.m1 * e_r + s.m2_tilde * e_s_hs / 4 + s.m3 * e_dw3 / 18)
    if variant == "b":
        if sigma_inv_half is None:
            raise ContractError("variant (b) needs the operator norm of Sigma^{-1/2}")
        return (s.m1 * op_lambda_inv * (e_r + sigma_inv_half / math.sqrt(2 * math.pi) * e_s_hs)
                + math.sqrt(2 * math.pi) / 24 * s.m2 * op_lambda_inv * sigma_inv_half * e_dw3)
    raise ContractError(f"unknown variant {variant!r}")


# Small symmetric eigenproblems.

def _off(a: np.ndarray) -> float:
    return math.sqrt(float(np.sum(a * a) - np.sum(np.diag(a) ** 2)))


def jacobi_eigenvalues(V, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, in increasing order."""
    a = np.array(V, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ContractError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] > 64:
        raise ContractError("Jacobi solver supports at most 64 x 64 matrices")
    if np.max(np.abs(a - a.T), initial=0.0) > 1e-12:
        raise ContractError("matrix is not symmetric within 1e-12")
    a = (a + a.T) / 2
    r = a.shape[0]
    for _ in range(max_sweeps):
        if _off(a) < tol:
            break
        for p in range(r - 1):
            for q in range(p + 1, r):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :], a[q, :] = c * rp - s * rq, s * rp + c * rq
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p], a[:, q] = c * cp - s * cq, s * cp + c * cq
    return np.sort(np.diag(a))


def min_eigenvalue_sym(V) -> float:
    return float(jacobi_eigenvalues(V)[0])
