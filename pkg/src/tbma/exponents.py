"""Error-exponent analytics for edge and cloud hypothesis testing.

The joint misdetection probability over L collection intervals behaves like
exp(-L * E + o(L)).  This module computes the exponent E for the two
architectures from the Gaussian surrogates:

* edge: each edge node tests its own bit locally.  The exponent is the worst
  case over cells and over the interfering cells' bit patterns of the
  Chernoff information between the bit-0 and bit-1 surrogates.

* cloud: the cloud runs a 2^K-ary test on the stacked quantized vectors.  The
  exponent is the worst case over ordered hypothesis pairs of the Chernoff
  information between the cloud surrogates, with the quantization noise
  variance set by the fronthaul rate balance (``solve_quantization_noise``).

Exponents are reported in nats per interval; fronthaul capacities and the
rate-balance residual are in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .model import (
    GaussianSurrogate,
    HypothesisVector,
    SystemConfig,
    UnsupportedConfigError,
    _insert_bit,
    _interference_patterns,
    all_hypotheses,
    cloud_surrogate,
    edge_surrogate,
    require_valid,
)

__all__ = [
    "NumericalError",
    "ExponentReport",
    "QuantizationSolution",
    "alpha_chernoff",
    "chernoff_information",
    "edge_exponent",
    "cloud_exponent",
    "solve_quantization_noise",
    "interference_limit_probe",
    "ProbeRow",
]

GOLDEN_TOL = 1e-8
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class NumericalError(RuntimeError):
    """Linear-algebra failure inside the exponent computations."""


def _alpha_chernoff_diag(g0: GaussianSurrogate, g1: GaussianSurrogate, alpha: float) -> float:
    # Per-entry specialization for diagonal covariances; all logs stay scalar
    # so arbitrarily large interference variances cannot overflow.
    v0 = g0.var
    v1 = g1.var
    va = alpha * v0 + (1.0 - alpha) * v1
    if np.any(va <= 0.0):
        raise NumericalError("blended variance is not positive")
    logdet_term = 0.5 * np.sum(np.log(va) - alpha * np.log(v0) - (1.0 - alpha) * np.log(v1))
    dmu = g0.mean - g1.mean
    quad_term = 0.5 * alpha * (1.0 - alpha) * np.sum(dmu * dmu / va)
    return float(logdet_term + quad_term)


def _chol_logdet(mat: np.ndarray, label: str) -> tuple[np.ndarray, float]:
    try:
        chol = np.linalg.cholesky(mat)
    except np.linalg.LinAlgError as exc:
        eigs = np.linalg.eigvalsh(mat)
        raise NumericalError(
            f"{label} is not positive definite (eigenvalue range "
            f"[{eigs.min():.3e}, {eigs.max():.3e}])"
        ) from exc
    return chol, 2.0 * float(np.sum(np.log(np.diag(chol))))


def _alpha_chernoff_dense(g0: GaussianSurrogate, g1: GaussianSurrogate, alpha: float) -> float:
    blend = alpha * g0.cov + (1.0 - alpha) * g1.cov
    chol_b, logdet_b = _chol_logdet(blend, "blended covariance")
    _, logdet_0 = _chol_logdet(g0.cov, "covariance of surrogate 0")
    _, logdet_1 = _chol_logdet(g1.cov, "covariance of surrogate 1")
    logdet_term = 0.5 * (logdet_b - alpha * logdet_0 - (1.0 - alpha) * logdet_1)
    dmu = g0.mean - g1.mean
    solved = scipy.linalg.cho_solve((chol_b, True), dmu)
    quad_term = 0.5 * alpha * (1.0 - alpha) * float(dmu @ solved)
    return float(logdet_term + quad_term)


def alpha_chernoff(g0: GaussianSurrogate, g1: GaussianSurrogate, alpha: float) -> float:
    """Chernoff alpha-divergence (nats) between two Gaussian surrogates.

    For Gaussians the divergence has the closed form

        0.5 * log |aS0 + (1-a)S1| / (|S0|^a |S1|^(1-a))
        + a(1-a)/2 * (m0-m1)^T (aS0 + (1-a)S1)^{-1} (m0-m1)

    evaluated here in the log domain.  It is 0 at alpha in {0, 1}, concave on
    [0, 1], and nonnegative.
    """
    if g0.dim != g1.dim:
        raise ValueError(f"surrogate dimensions differ: {g0.dim} vs {g1.dim}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if g0.diagonal_only and g1.diagonal_only:
        return _alpha_chernoff_diag(g0, g1, alpha)
    return _alpha_chernoff_dense(g0, g1, alpha)


def _golden_max(f, lo: float, hi: float, tol: float) -> tuple[float, float]:
    # Standard golden-section search for the max of a concave scalar function.
    a, b = lo, hi
    c = b - (b - a) * _INVPHI
    d = a + (b - a) * _INVPHI
    fc, fd = f(c), f(d)
    while abs(b - a) > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - (b - a) * _INVPHI
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + (b - a) * _INVPHI
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def chernoff_information(g0: GaussianSurrogate, g1: GaussianSurrogate) -> tuple[float, float]:
    """Maximize the alpha-divergence over alpha in [0, 1].

    Returns ``(value_nats, alpha_star)``.  Identical surrogates give
    ``(0.0, 0.5)``.  The golden-section search (tolerance 1e-8) is backed by a
    coarse three-point grid so a numerically flat objective cannot push the
    result below an interior sample.
    """
    if (
        g0.dim == g1.dim
        and np.array_equal(g0.mean, g1.mean)
        and np.array_equal(g0.cov, g1.cov)
    ):
        return 0.0, 0.5
    f = lambda a: alpha_chernoff(g0, g1, a)
    alpha, value = _golden_max(f, 0.0, 1.0, GOLDEN_TOL)
    for probe in (0.25, 0.5, 0.75):
        fp = f(probe)
        if fp > value:
            alpha, value = probe, fp
    if value <= 1e-12:
        return max(value, 0.0), 0.5
    return value, alpha


@dataclass(frozen=True)
class ExponentReport:
    """Worst-case exponent plus the hypothesis pair and alpha achieving it.

    ``per_cell`` (edge mode) carries each cell's own worst-case exponent;
    ``argmin_cell`` is the cell attaining the overall min.  Ties resolve to
    the lexicographically smallest cell / hypothesis pair.
    """

    exponent: float
    alpha_star: float
    argmin_pair: tuple[HypothesisVector, HypothesisVector]
    per_cell: tuple[float, ...] | None = None
    argmin_cell: int | None = None


def edge_exponent(config: SystemConfig) -> ExponentReport:
    """Worst-case edge exponent: min over cells and interference patterns of
    the Chernoff information between the bit-0 and bit-1 surrogates."""
    require_valid(config)
    best: tuple[float, float, HypothesisVector, HypothesisVector, int] | None = None
    per_cell: list[float] = []
    for cell in range(config.K):
        cell_best: float | None = None
        for pattern in _interference_patterns(config.K, cell):
            h0 = _insert_bit(pattern, cell, 0)
            h1 = _insert_bit(pattern, cell, 1)
            value, alpha = chernoff_information(
                edge_surrogate(config, cell, h0),
                edge_surrogate(config, cell, h1),
            )
            if cell_best is None or value < cell_best:
                cell_best = value
            if best is None or value < best[0]:
                best = (value, alpha, h0, h1, cell)
        per_cell.append(float(cell_best))
    value, alpha, h0, h1, cell = best
    return ExponentReport(
        exponent=value,
        alpha_star=alpha,
        argmin_pair=(h0, h1),
        per_cell=tuple(per_cell),
        argmin_cell=cell,
    )


@dataclass(frozen=True)
class QuantizationSolution:
    """Root of the fronthaul rate balance for one edge node."""

    sigma2_q: float
    residual_bits: float
    iterations: int


def _prior_averaged_variance(config: SystemConfig, cell: int) -> np.ndarray:
    s = np.zeros(config.M)
    for hyp in all_hypotheses(config.K):
        p = config.prior.prob(hyp)
        if p > 0.0:
            s += p * edge_surrogate(config, cell, hyp).var
    return s


def solve_quantization_noise(config: SystemConfig, cell: int) -> QuantizationSolution:
    """Solve the per-node rate balance for the quantization noise variance.

    With S(m) the prior-averaged surrogate variance of entry m, the fronthaul
    budget of M*C bits per interval buys

        M * C = 0.5 * sum_m log2( (S(m) + s2q) / s2q )

    which is strictly increasing in s2q, so a bracketed bisection converges to
    any requested residual; we stop below 1e-9 bits.  C = 0 has no finite
    solution (infinite quantization noise): the cloud mode is unavailable.
    """
    require_valid(config)
    if config.C <= 0.0:
        raise UnsupportedConfigError(
            "C=0 fronthaul gives infinite quantization noise; cloud mode unavailable"
        )
    svar = _prior_averaged_variance(config, cell)
    target = config.M * config.C

    def residual(s2q: float) -> float:
        return target - 0.5 * float(np.sum(np.log2((svar + s2q) / s2q)))

    # Bracket the root from the two capacity asymptotes, then expand if the
    # initial guesses don't straddle it.
    geo = float(np.exp(np.mean(np.log(svar))))
    lo = geo * 2.0 ** (-2.0 * config.C)
    hi = max(float(np.sum(svar)) / (target * 2.0 * math.log(2.0)), lo) * 2.0
    iterations = 0
    while residual(lo) > 0.0:
        lo /= 4.0
        iterations += 1
        if iterations > 2000:
            raise NumericalError("failed to bracket the rate balance from below")
    while residual(hi) < 0.0:
        hi *= 4.0
        iterations += 1
        if iterations > 2000:
            raise NumericalError("failed to bracket the rate balance from above")

    mid = 0.5 * (lo + hi)
    res = residual(mid)
    while abs(res) > 1e-9:
        if res > 0.0:
            hi = mid
        else:
            lo = mid
        mid = 0.5 * (lo + hi)
        res = residual(mid)
        iterations += 1
        if iterations > 20000:
            raise NumericalError(f"rate-balance bisection stalled at residual {res:.3e}")
    return QuantizationSolution(sigma2_q=mid, residual_bits=res, iterations=iterations)


def cloud_exponent(config: SystemConfig) -> ExponentReport:
    """Worst-case cloud exponent: min over hypothesis pairs of the Chernoff
    information between the stacked quantized surrogates (K=2 only)."""
    require_valid(config)
    s2q = tuple(solve_quantization_noise(config, cell).sigma2_q for cell in range(config.K))
    hyps = all_hypotheses(config.K)
    surrogates = [cloud_surrogate(config, h, s2q) for h in hyps]
    best: tuple[float, float, HypothesisVector, HypothesisVector] | None = None
    for i in range(len(hyps)):
        for j in range(i + 1, len(hyps)):
            value, alpha = chernoff_information(surrogates[i], surrogates[j])
            if best is None or value < best[0]:
                best = (value, alpha, hyps[i], hyps[j])
    value, alpha, ha, hb = best
    return ExponentReport(exponent=value, alpha_star=alpha, argmin_pair=(ha, hb))


@dataclass(frozen=True)
class ProbeRow:
    sigma2_G: float
    edge: ExponentReport
    cloud: ExponentReport | None
    sigma2_q: tuple[float, ...] | None


def interference_limit_probe(
    config: SystemConfig, sigma2_G_grid: "np.ndarray | list[float]"
) -> list[ProbeRow]:
    """Edge and cloud exponents along an increasing cross-cell variance grid.

    The edge exponent collapses toward zero as the interference variance
    grows, while the cloud exponent stays bounded away from zero: the cloud
    reads the interferer's bit off the interference variance profile.  Cloud
    columns are omitted when the config has no usable fronthaul (C=0) or the
    cloud covariance is unsupported (K != 2).
    """
    grid = [float(v) for v in sigma2_G_grid]
    if not grid:
        raise ValueError("sigma2_G grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("sigma2_G grid must be strictly increasing")
    rows: list[ProbeRow] = []
    for s2g in grid:
        point = config.replace(sigma2_G=float(s2g))
        edge = edge_exponent(point)
        cloud = None
        s2q: tuple[float, ...] | None = None
        if point.C > 0.0 and point.K == 2:
            s2q = tuple(
                solve_quantization_noise(point, cell).sigma2_q for cell in range(point.K)
            )
            cloud = cloud_exponent(point)
        rows.append(ProbeRow(sigma2_G=float(s2g), edge=edge, cloud=cloud, sigma2_q=s2q))
    return rows
