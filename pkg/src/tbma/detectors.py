"""MAP detectors and Monte Carlo error estimation.

Edge detection is per cell: the node scores its two bit values against the
Gaussian surrogates, marginalizing the unknown interfering-cell bits under
the joint prior.  Cloud detection is one 2^K-ary MAP decision on the stacked
quantized vectors.  Both resolve score ties toward the lexicographically
smallest hypothesis.

For single-cell configs with a small activity rate an exact likelihood is
available by enumerating the Poisson-multinomial sensor counts; it serves as
the reference the surrogate detector is checked against.

``estimate_error_prob`` runs seeded Monte Carlo trials of the full chain
(sample, quantize for the cloud path, detect) and reports the joint error
frequency with a Wilson interval.  Trials are processed in fixed-size chunks
with per-chunk substreams and a commutative reduction, so results do not
depend on the thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg
from scipy.special import gammaln, logsumexp

from .exponents import _chol_logdet, solve_quantization_noise
from .model import (
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
from .simulate import ReceivedBlock, RngSeed, quantize_vectors, sample_intervals

__all__ = [
    "DetectionOutcome",
    "ErrorProbEstimate",
    "ExponentFit",
    "edge_map_detect",
    "cloud_map_detect",
    "exact_poisson_mixture_loglik",
    "exact_map_detect",
    "estimate_error_prob",
    "wilson_interval",
    "fit_exponent",
]

_Z95 = 1.959963984540054  # two-sided 95% normal quantile

# Trial chunk size for the error estimator.  Fixed (not tuned per run) so the
# substream layout, and hence every estimate, is independent of --threads.
_CHUNK = 8192


@dataclass(frozen=True)
class DetectionOutcome:
    """MAP decision plus the log scores it was taken from.

    ``decision`` is a bit (edge mode) or a HypothesisVector (cloud mode); it
    is always the argmax of ``log_scores`` with ties resolved to the smallest
    index.
    """

    decision: "int | HypothesisVector"
    log_scores: np.ndarray


def _diag_loglik(y: np.ndarray, mean: np.ndarray, var: np.ndarray, complex_field: bool) -> np.ndarray:
    """Log density of independent Gaussian entries, summed over the last axis."""
    if complex_field:
        dev = np.abs(y - mean) ** 2
        return -np.sum(dev / var + np.log(np.pi * var), axis=-1)
    dev = (y - mean) ** 2
    return -0.5 * np.sum(dev / var + np.log(2.0 * np.pi * var), axis=-1)


def _edge_log_scores(y: np.ndarray, config: SystemConfig, cell: int) -> np.ndarray:
    """Per-bit log scores for a batch of cell observations.

    y has shape (n, L, M); the result has shape (n, 2) with

        score_j = log sum over patterns k' of
                  Pr[hyp(j, k')] * prod_l f(y_l | surrogate(cell, hyp(j, k')))
    """
    complex_field = config.signal_field == "complex"
    n = y.shape[0]
    scores = np.full((n, 2), -np.inf)
    for j in (0, 1):
        terms = []
        for pattern in _interference_patterns(config.K, cell):
            hyp = _insert_bit(pattern, cell, j)
            prior = config.prior.prob(hyp)
            if prior <= 0.0:
                continue
            g = edge_surrogate(config, cell, hyp)
            ll = _diag_loglik(y, g.mean, g.var, complex_field).sum(axis=-1)
            terms.append(math.log(prior) + ll)
        if terms:
            scores[:, j] = logsumexp(np.stack(terms, axis=0), axis=0)
    return scores


def _stack_blocks(blocks: "Sequence[ReceivedBlock] | np.ndarray") -> np.ndarray:
    if isinstance(blocks, np.ndarray):
        return np.atleast_2d(blocks)
    return np.stack([b.y for b in blocks], axis=0)


def edge_map_detect(
    blocks: "Sequence[ReceivedBlock] | np.ndarray",
    config: SystemConfig,
    cell: int,
) -> DetectionOutcome:
    """MAP estimate of one cell's bit from its L received vectors."""
    require_valid(config)
    y = _stack_blocks(blocks)
    scores = _edge_log_scores(y[np.newaxis, :, :], config, cell)[0]
    return DetectionOutcome(decision=int(np.argmax(scores)), log_scores=scores)


class _DenseScorer:
    """Log density for a fixed dense-covariance surrogate, batched."""

    def __init__(self, mean: np.ndarray, cov: np.ndarray, complex_field: bool):
        self.mean = mean
        self.complex_field = complex_field
        self.chol, logdet = _chol_logdet(cov, "cloud covariance")
        d = mean.size
        if complex_field:
            self.const = -(logdet + d * math.log(math.pi))
        else:
            self.const = -0.5 * (logdet + d * math.log(2.0 * math.pi))

    def loglik(self, y: np.ndarray) -> np.ndarray:
        flat = (y - self.mean).reshape(-1, self.mean.size)
        z = scipy.linalg.solve_triangular(self.chol, flat.T, lower=True)
        quad = np.sum(np.abs(z) ** 2, axis=0).reshape(y.shape[:-1])
        if self.complex_field:
            return -quad + self.const
        return -0.5 * quad + self.const


def _cloud_log_scores(
    y: np.ndarray, config: SystemConfig, sigma2_q: Sequence[float]
) -> np.ndarray:
    """Log posterior scores over all 2^K hypotheses; y has shape (n, L, K*M)."""
    complex_field = config.signal_field == "complex"
    hyps = all_hypotheses(config.K)
    n = y.shape[0]
    scores = np.full((n, len(hyps)), -np.inf)
    for idx, hyp in enumerate(hyps):
        prior = config.prior.prob(hyp)
        if prior <= 0.0:
            continue
        g = cloud_surrogate(config, hyp, sigma2_q)
        scorer = _DenseScorer(g.mean, g.cov, complex_field)
        scores[:, idx] = math.log(prior) + scorer.loglik(y).sum(axis=-1)
    return scores


def cloud_map_detect(
    blocks: np.ndarray,
    config: SystemConfig,
    sigma2_q: Sequence[float],
) -> DetectionOutcome:
    """Joint MAP estimate from L stacked quantized vectors, shape (L, K*M)."""
    require_valid(config)
    y = np.atleast_2d(blocks)
    if y.shape[-1] != config.K * config.M:
        raise ValueError(
            f"stacked vectors must have K*M={config.K * config.M} entries, got {y.shape[-1]}"
        )
    scores = _cloud_log_scores(y[np.newaxis, :, :], config, sigma2_q)[0]
    idx = int(np.argmax(scores))
    return DetectionOutcome(
        decision=HypothesisVector.from_index(idx, config.K), log_scores=scores
    )


# ---------------------------------------------------------------------------
# exact single-cell reference likelihood
# ---------------------------------------------------------------------------


def _compositions(total: int, parts: int) -> np.ndarray:
    """All nonnegative integer vectors of length ``parts`` summing to ``total``."""
    if parts == 1:
        return np.array([[total]], dtype=np.int64)
    rows = []
    for head in range(total + 1):
        tail = _compositions(total - head, parts - 1)
        rows.append(np.concatenate([np.full((tail.shape[0], 1), head, dtype=np.int64), tail], axis=1))
    return np.concatenate(rows, axis=0)


def exact_poisson_mixture_loglik(
    blocks: "Sequence[ReceivedBlock] | np.ndarray",
    config: SystemConfig,
    bit: int,
    n_max: int | None = None,
) -> float:
    """Exact log likelihood of a single cell's blocks under one bit value.

    Marginalizes the Poisson sensor count and the multinomial preamble split
    in full: conditioned on per-preamble counts c, entry m is Gaussian with
    mean c_m*mu_H and variance c_m*sigma2_H + 1/snr, so the likelihood is a
    finite Gaussian mixture once the Poisson tail is truncated at ``n_max``
    (default lambda + 10*sqrt(lambda) + 20).  Only K=1 is supported; the term
    count explodes combinatorially otherwise.
    """
    require_valid(config)
    if config.K != 1:
        raise UnsupportedConfigError("exact likelihood is implemented for K=1 only")
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit}")
    if n_max is None:
        n_max = int(math.ceil(config.lam + 10.0 * math.sqrt(config.lam) + 20.0))
    if math.comb(n_max + config.M - 1, config.M - 1) > 10**6:
        raise ValueError(
            f"count enumeration too large: C({n_max + config.M - 1},{config.M - 1}) > 1e6 terms"
        )

    y = _stack_blocks(blocks)
    p = config.p_table(0, bit)
    logp = np.log(np.where(p > 0.0, p, 1.0))

    counts = np.concatenate([_compositions(n, config.M) for n in range(n_max + 1)], axis=0)
    totals = counts.sum(axis=1)
    # log Poisson(total) + log multinomial(counts | total, p); the log(n!)
    # factors cancel between the two.  Zero-prob categories force their
    # counts to zero.
    log_w = (
        totals * math.log(config.lam)
        - config.lam
        - gammaln(counts + 1.0).sum(axis=1)
        + (counts * logp).sum(axis=1)
    )
    impossible = np.any((counts > 0) & (p[np.newaxis, :] <= 0.0), axis=1)
    log_w[impossible] = -np.inf

    mean = counts * config.mu_H
    var = counts * config.sigma2_H + config.noise_var
    complex_field = config.signal_field == "complex"
    # (L, T, M) broadcast: per interval, per mixture component
    ll = _diag_loglik(y[:, np.newaxis, :], mean[np.newaxis, :, :], var[np.newaxis, :, :], complex_field)
    return float(np.sum(logsumexp(ll + log_w[np.newaxis, :], axis=1)))


def exact_map_detect(
    blocks: "Sequence[ReceivedBlock] | np.ndarray",
    config: SystemConfig,
    n_max: int | None = None,
) -> DetectionOutcome:
    """MAP bit estimate for K=1 using the exact mixture likelihood."""
    scores = np.empty(2)
    for bit in (0, 1):
        prior = config.prior.prob(HypothesisVector((bit,)))
        lp = math.log(prior) if prior > 0.0 else -np.inf
        scores[bit] = lp + exact_poisson_mixture_loglik(blocks, config, bit, n_max=n_max)
    return DetectionOutcome(decision=int(np.argmax(scores)), log_scores=scores)


# ---------------------------------------------------------------------------
# Monte Carlo error estimation
# ---------------------------------------------------------------------------


def wilson_interval(errors: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = errors / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class ErrorProbEstimate:
    mode: str
    L: int
    trials: int
    errors: int
    p_hat: float
    ci_lo: float
    ci_hi: float

    @property
    def wilson(self) -> tuple[float, float]:
        return self.ci_lo, self.ci_hi


def _edge_decide_batch(y: np.ndarray, config: SystemConfig) -> np.ndarray:
    """Per-cell MAP bits for a batch; y has shape (n, L, K, M) -> (n, K)."""
    n = y.shape[0]
    bits = np.zeros((n, config.K), dtype=np.int64)
    for cell in range(config.K):
        scores = _edge_log_scores(y[:, :, cell, :], config, cell)
        bits[:, cell] = np.argmax(scores, axis=1)
    return bits


def _run_chunk(
    config: SystemConfig,
    L: int,
    mode: str,
    sigma2_q: tuple[float, ...] | None,
    chunk_seed: RngSeed,
    chunk_trials: int,
) -> int:
    gen = chunk_seed.generator()
    table = config.prior.table / config.prior.table.sum()
    truths = gen.choice(table.size, size=chunk_trials, p=table)
    complex_field = config.signal_field == "complex"
    errors = 0
    for idx in range(table.size):
        mask = truths == idx
        n_here = int(mask.sum())
        if n_here == 0:
            continue
        hyp = HypothesisVector.from_index(idx, config.K)
        y = sample_intervals(config, hyp, n_here * L, gen).reshape(
            n_here, L, config.K, config.M
        )
        if mode == "edge":
            bits = _edge_decide_batch(y, config)
            wrong = np.any(bits != np.asarray(hyp.bits)[np.newaxis, :], axis=1)
        else:
            for cell in range(config.K):
                y[:, :, cell, :] = quantize_vectors(
                    y[:, :, cell, :], sigma2_q[cell], gen, complex_field
                )
            stacked = y.reshape(n_here, L, config.K * config.M)
            scores = _cloud_log_scores(stacked, config, sigma2_q)
            wrong = np.argmax(scores, axis=1) != idx
        errors += int(wrong.sum())
    return errors


def estimate_error_prob(
    config: SystemConfig,
    L: int,
    trials: int,
    mode: str,
    rng: "RngSeed | int",
    threads: int = 1,
) -> ErrorProbEstimate:
    """Joint error frequency of the chosen architecture over seeded trials.

    Each trial draws a truth from the prior, simulates L intervals, runs the
    per-cell edge detectors or the joint cloud detector, and counts an error
    if any cell's bit is wrong.  ``trials`` must be at least 100 so the Wilson
    interval is meaningful.
    """
    require_valid(config)
    if trials < 100:
        raise ValueError(f"trials must be >= 100, got {trials}")
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")
    if mode not in ("edge", "cloud"):
        raise ValueError(f"mode must be 'edge' or 'cloud', got {mode!r}")
    root = rng if isinstance(rng, RngSeed) else RngSeed(int(rng))

    sigma2_q: tuple[float, ...] | None = None
    if mode == "cloud":
        sigma2_q = tuple(
            solve_quantization_noise(config, cell).sigma2_q for cell in range(config.K)
        )
        # fail early on unsupported cloud configs rather than mid-run
        cloud_surrogate(config, all_hypotheses(config.K)[0], sigma2_q)

    spans = [
        (i, min(_CHUNK, trials - i * _CHUNK))
        for i in range((trials + _CHUNK - 1) // _CHUNK)
    ]
    jobs = [(config, L, mode, sigma2_q, root.substream(i), n) for i, n in spans]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            errors = sum(pool.map(lambda args: _run_chunk(*args), jobs))
    else:
        errors = sum(_run_chunk(*args) for args in jobs)

    p_hat = errors / trials
    lo, hi = wilson_interval(errors, trials)
    return ErrorProbEstimate(
        mode=mode, L=L, trials=trials, errors=errors, p_hat=p_hat, ci_lo=lo, ci_hi=hi
    )


@dataclass(frozen=True)
class ExponentFit:
    slope_nats: float
    intercept_nats: float
    used_L: tuple[int, ...]


def fit_exponent(
    pe_by_L: Sequence[tuple[int, float]],
    trials: int | None = None,
    min_events: int = 10,
) -> ExponentFit:
    """Least-squares slope of -log p_hat versus L.

    Points with p_hat outside (0, 1) are dropped, as are points backed by
    fewer than ``min_events`` error events when ``trials`` is given (their
    relative noise would dominate the fit).  At least three usable points are
    required.
    """
    usable = []
    for L, p in pe_by_L:
        if not 0.0 < p < 1.0:
            continue
        if trials is not None and p * trials < min_events:
            continue
        usable.append((int(L), float(p)))
    if len(usable) < 3:
        raise ValueError(f"insufficient usable points: {len(usable)} of {len(pe_by_L)}")
    ls = np.array([l for l, _ in usable], dtype=float)
    neglog = np.array([-math.log(p) for _, p in usable])
    slope, intercept = np.polyfit(ls, neglog, 1)
    return ExponentFit(
        slope_nats=float(slope),
        intercept_nats=float(intercept),
        used_L=tuple(l for l, _ in usable),
    )
