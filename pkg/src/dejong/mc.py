"""Monte Carlo sampling of W and the empirical 1-Wasserstein distance to N(0, 1)."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import ndtr

from .bounds import univariate_bound
from .errors import ContractError
from .hoeffding import DegenerateUStatistic, HoeffdingDecomposition, VectorModel, rho_squared
from .moments import cross_moments, fourth_moment
from .space import FiniteProductSpace

CHUNK = 1 << 15
PASS_SIGMAS = 3.0

Model = Union[DegenerateUStatistic, HoeffdingDecomposition, VectorModel]


# Standard normal functions.

def normal_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)


def normal_cdf(x):
    return ndtr(np.asarray(x, dtype=float))


# Rational approximation coefficients for the normal quantile (P. J. Acklam).
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00, 3.754408661907416e00)
_P_LOW = 0.02425


def _poly(coeffs, x):
    out = np.zeros_like(x)
    for c in coeffs:
        out = out * x + c
    return out


def _acklam_lower(p: np.ndarray) -> np.ndarray:
    """Initial quantile approximation for p in (0, 1/2]."""
    x = np.empty_like(p)
    tail = p < _P_LOW
    q = np.sqrt(-2 * np.log(p[tail]))
    x[tail] = _poly(_C, q) / (_poly(_D, q) * q + 1)
    q = p[~tail] - 0.5
    r = q * q
    x[~tail] = _poly(_A, r) * q / (_poly(_B, r) * r + 1)
    return x


def normal_quantile(p):
    """Inverse of the standard normal cdf: rational approximation plus one Halley step."""
    arr = np.asarray(p, dtype=float)
    if not np.all((arr > 0) & (arr < 1)):
        raise ContractError("normal_quantile needs 0 < p < 1")
    upper = arr > 0.5
    lo = np.where(upper, 1.0 - arr, arr)
    x = _acklam_lower(np.atleast_1d(lo)).reshape(lo.shape)
    e = ndtr(x) - lo
    u = e * math.sqrt(2 * math.pi) * np.exp(0.5 * x * x)
    x = x - u / (1 + 0.5 * x * u)
    x = np.where(upper, -x, x)
    return float(x) if np.ndim(p) == 0 else x


# Empirical Wasserstein distance.

def _antiderivative(u: np.ndarray) -> np.ndarray:
    """G(u) = integral_0^u of the normal quantile = -pdf(quantile(u)), with G(0) = G(1) = 0."""
    out = np.zeros_like(u)
    inner = (u > 0) & (u < 1)
    out[inner] = -normal_pdf(normal_quantile(u[inner]))
    return out


def wasserstein1_to_normal(samples) -> float:
    """W_1 between the empirical law of ``samples`` and N(0, 1), via the quantile coupling.

    On the cell [a, b] = [(i-1)/N, i/N] the empirical quantile is x = X_(i), and with
    c = clip(Phi(x), a, b) the integral of |x - Phi^{-1}(u)| is x(2c - a - b) + G(a) + G(b) - 2G(c).
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise ContractError("wasserstein1_to_normal needs at least one sample")
    if not np.all(np.isfinite(x)):
        raise ContractError("samples must be finite")
    n = x.size
    grid = np.arange(n + 1) / n
    g_grid = _antiderivative(grid)
    a, b = grid[:-1], grid[1:]
    ga, gb = g_grid[:-1], g_grid[1:]
    phi = normal_cdf(x)
    c = np.clip(phi, a, b)
    gc = np.where(phi <= a, ga, np.where(phi >= b, gb, -normal_pdf(x)))
    return float(math.fsum(x * (2 * c - a - b) + ga + gb - 2 * gc))


# Sampling.

def _stream(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def _decompositions(model: Model) -> list[HoeffdingDecomposition]:
    if isinstance(model, VectorModel):
        return [c.decomposition for c in model.components]
    if isinstance(model, DegenerateUStatistic):
        return [model.decomposition]
    return [model]


def _draw_indices(space: FiniteProductSpace, u: np.ndarray) -> np.ndarray:
    """Inverse-cdf map of uniforms (rows = draws, columns = coordinates) to atom indices."""
    out = np.empty(u.shape, dtype=np.intp)
    for j in range(space.n):
        cum = np.cumsum(space.probs(j + 1))[:-1]
        out[:, j] = np.searchsorted(cum, u[:, j], side="right")
    return out


def evaluate(dec: HoeffdingDecomposition, idx: np.ndarray) -> np.ndarray:
    """Values of the decomposed function at atom-index rows ``idx``."""
    out = np.zeros(idx.shape[0])
    for J, k in dec.components.items():
        if not J:
            out += float(k.values)
        else:
            out += k.values[tuple(idx[:, j - 1] for j in J)]
    return out


def _chunk(space, decs, seed, index, size) -> np.ndarray:
    u = _stream(seed, index).random((size, space.n))
    idx = _draw_indices(space, u)
    return np.stack([evaluate(d, idx) for d in decs], axis=1)


@dataclass(frozen=True)
class SampleRun:
    seed: int
    n_samples: int
    samples: np.ndarray
    wasserstein: tuple[float, ...]
    error_proxy: tuple[float, ...]

    @property
    def values(self) -> np.ndarray:
        """Samples of a scalar model as a 1-d array."""
        return self.samples[:, 0] if self.samples.shape[1] == 1 else self.samples


def error_proxy(x: np.ndarray) -> float:
    """sqrt(2/N) * sample std + 2 / sqrt(N)."""
    n = x.size
    return math.sqrt(2 / n) * float(np.std(x)) + 2 / math.sqrt(n)


def sample(model: Model, n_samples: int, seed: int, threads: int = 1) -> SampleRun:
    """Draw ``n_samples`` realizations of W (or of each component of a vector model).

    Draws come in fixed chunks, chunk c using its own Philox stream derived from (seed, c),
    so the output does not depend on ``threads``.
    """
    if n_samples < 1:
        raise ContractError("n_samples must be at least 1")
    if threads < 1:
        raise ContractError("threads must be at least 1")
    decs = _decompositions(model)
    space = decs[0].space
    sizes = [min(CHUNK, n_samples - s) for s in range(0, n_samples, CHUNK)]
    jobs = [(c, sz) for c, sz in enumerate(sizes)]
    if threads == 1:
        parts = [_chunk(space, decs, seed, c, sz) for c, sz in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda job: _chunk(space, decs, seed, *job), jobs))
    samples = np.concatenate(parts, axis=0)
    w1 = tuple(wasserstein1_to_normal(samples[:, i]) for i in range(samples.shape[1]))
    proxy = tuple(error_proxy(samples[:, i]) for i in range(samples.shape[1]))
    return SampleRun(seed, n_samples, samples, w1, proxy)


@dataclass(frozen=True)
class Validation:
    wasserstein: float
    bound: float
    error_proxy: float
    margin: float
    passed: bool

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"


def validate(distance: float, bound: float, proxy: float) -> Validation:
    margin = bound + PASS_SIGMAS * proxy - distance
    return Validation(distance, bound, proxy, margin, distance <= bound + PASS_SIGMAS * proxy)


def bound_validation(u: DegenerateUStatistic, n_samples: int, seed: int, mode: str = "cd-rho",
                     c_d: float | None = None, threads: int = 1, report=None):
    """Compare the empirical W_1 with the bound; PASS iff W_1 <= bound + 3 * error proxy."""
    report = report or univariate_bound(u, mode, c_d)
    run = sample(u, n_samples, seed, threads)
    return validate(run.wasserstein[0], report.bound, run.error_proxy[0]), report, run


@dataclass(frozen=True)
class LimitGaps:
    """Distances of a vector model from the limits required for joint normality."""

    rho2: tuple[float, ...]
    fourth_gap: tuple[float, ...]
    cross_gap: dict


def limit_gaps(v: VectorModel) -> LimitGaps:
    """rho_k^2, |E[W(k)^4] - 3| and, for equal orders, |E[W(j)^2 W(k)^2] - (1 + 2 v_jk^2)|."""
    rho2 = tuple(rho_squared(c) for c in v.components)
    gap = tuple(abs(fourth_moment(c) - 3) for c in v.components)
    cross = {}
    for j in range(1, v.r + 1):
        for k in range(j + 1, v.r + 1):
            if v.orders[j - 1] == v.orders[k - 1]:
                cm = cross_moments(v, j, k)
                cross[j, k] = abs(cm.e22 - (1 + 2 * cm.v * cm.v))
    return LimitGaps(rho2, gap, cross)
