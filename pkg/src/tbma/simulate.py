"""Monte Carlo sampler for the TBMA physical layer.

Per collection interval and cell, the number of active sensors is Poisson;
each active sensor picks the preamble matching its measurement, drawn from
the cell's distribution under the cell's current bit.  An edge node's entry m
sums one channel coefficient per sensor that picked preamble m (in-cell
channels for its own sensors, interference channels for every other cell's
sensors) plus thermal noise of variance 1/snr.

The sampler draws the per-preamble sensor counts first, then draws each
channel sum from its exact conditional law: given a count n, a sum of n iid
Gaussian coefficients is Gaussian with mean n*mu and variance n*sigma2.  The
same counts feed every receiving node, which preserves the cross-node
consistency of a sensor's preamble choice.  In the complex field, channel
scatter and noise are circularly symmetric (variance split evenly between
the real and imaginary parts).

Draw order is fixed (counts per cell, then per receiving node: own-cell sums,
interferer sums in cell order, noise; quantization noise last), so one seed
reproduces one dataset bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import HypothesisVector, SystemConfig, require_valid

__all__ = [
    "RngSeed",
    "ReceivedBlock",
    "sample_interval",
    "sample_intervals",
    "quantize_block",
    "quantize_vectors",
    "empirical_moments",
]


@dataclass(frozen=True, slots=True)
class RngSeed:
    """Root seed plus a substream label path.

    ``substream`` extends the label path; ``generator`` materializes a
    PCG64 generator from ``SeedSequence(seed, spawn_key=stream)``, so equal
    (seed, stream) pairs reproduce equal draws.
    """

    seed: int
    stream: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must fit in u64, got {self.seed}")

    def substream(self, *labels: int) -> "RngSeed":
        return RngSeed(self.seed, self.stream + tuple(int(x) for x in labels))

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=self.stream))


def as_generator(rng: "RngSeed | int | np.random.Generator") -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngSeed):
        return rng.generator()
    return RngSeed(int(rng)).generator()


@dataclass(frozen=True, slots=True)
class ReceivedBlock:
    """One edge node's length-M received vector for one interval."""

    cell: int
    interval: int
    y: np.ndarray


def _multinomial_rows(rng: np.random.Generator, totals: np.ndarray, p: np.ndarray) -> np.ndarray:
    # Sequential binomial splitting; vectorized over rows, loop over the M
    # categories only.
    out = np.zeros(totals.shape + (p.size,), dtype=np.int64)
    remaining = totals.astype(np.int64).copy()
    rest = 1.0
    for m in range(p.size - 1):
        frac = 0.0 if rest <= 0.0 else min(max(p[m] / rest, 0.0), 1.0)
        out[..., m] = rng.binomial(remaining, frac)
        remaining -= out[..., m]
        rest -= p[m]
    out[..., -1] = remaining
    return out


def draw_counts(
    config: SystemConfig,
    truth: HypothesisVector,
    n: int,
    rng: "RngSeed | int | np.random.Generator",
) -> np.ndarray:
    """Per-preamble active-sensor counts, shape (n, K, M).

    Counts are Poisson in total per cell (mean lambda) and split across
    preambles by the cell's distribution under its bit in ``truth``; by
    Poisson thinning each entry is Poisson(lambda * p(m)) on its own.
    """
    require_valid(config)
    gen = as_generator(rng)
    counts = np.zeros((n, config.K, config.M), dtype=np.int64)
    for cell in range(config.K):
        totals = gen.poisson(config.lam, size=n)
        counts[:, cell, :] = _multinomial_rows(gen, totals, config.p_table(cell, truth[cell]))
    return counts


def _channel_sums(
    gen: np.random.Generator,
    counts: np.ndarray,
    mu: float,
    sigma2: float,
    complex_field: bool,
) -> np.ndarray:
    # Sum of `count` iid coefficients, drawn from the exact conditional law.
    mean = counts * mu
    scatter = counts * sigma2
    if not complex_field:
        return gen.normal(mean, np.sqrt(scatter))
    re = gen.normal(mean, np.sqrt(0.5 * scatter))
    im = gen.normal(0.0, np.sqrt(0.5 * scatter))
    return re + 1j * im


def sample_intervals(
    config: SystemConfig,
    truth: HypothesisVector,
    n: int,
    rng: "RngSeed | int | np.random.Generator",
) -> np.ndarray:
    """Received vectors for all edge nodes over n intervals, shape (n, K, M)."""
    require_valid(config)
    if truth.n_cells != config.K:
        raise ValueError(f"truth has {truth.n_cells} cells, config has {config.K}")
    gen = as_generator(rng)
    complex_field = config.signal_field == "complex"
    counts = draw_counts(config, truth, n, gen)

    dtype = np.complex128 if complex_field else np.float64
    y = np.zeros((n, config.K, config.M), dtype=dtype)
    for node in range(config.K):
        y[:, node, :] += _channel_sums(
            gen, counts[:, node, :], config.mu_H, config.sigma2_H, complex_field
        )
        for other in range(config.K):
            if other == node:
                continue
            y[:, node, :] += _channel_sums(
                gen, counts[:, other, :], config.mu_G, config.sigma2_G, complex_field
            )
        if complex_field:
            scale = np.sqrt(0.5 * config.noise_var)
            y[:, node, :] += gen.normal(0.0, scale, size=(n, config.M)) + 1j * gen.normal(
                0.0, scale, size=(n, config.M)
            )
        else:
            y[:, node, :] += gen.normal(0.0, np.sqrt(config.noise_var), size=(n, config.M))
    return y


def sample_interval(
    config: SystemConfig,
    truth: HypothesisVector,
    interval: int,
    rng: "RngSeed | int",
) -> list[ReceivedBlock]:
    """One interval's received vectors as per-node blocks.

    ``rng`` is a root seed; the draw comes from its (interval,)-labeled
    substream, so block l is the same whether intervals are sampled one by
    one or in any order.
    """
    if not isinstance(rng, RngSeed):
        rng = RngSeed(int(rng))
    y = sample_intervals(config, truth, 1, rng.substream(interval))
    return [ReceivedBlock(cell=c, interval=interval, y=y[0, c, :]) for c in range(config.K)]


def quantize_vectors(
    y: np.ndarray,
    sigma2_q: float,
    rng: "RngSeed | int | np.random.Generator",
    complex_field: bool = False,
) -> np.ndarray:
    """Fronthaul test channel: add white Gaussian noise of variance sigma2_q."""
    if sigma2_q < 0.0:
        raise ValueError(f"sigma2_q must be >= 0, got {sigma2_q}")
    gen = as_generator(rng)
    if complex_field:
        scale = np.sqrt(0.5 * sigma2_q)
        return y + gen.normal(0.0, scale, size=y.shape) + 1j * gen.normal(
            0.0, scale, size=y.shape
        )
    return y + gen.normal(0.0, np.sqrt(sigma2_q), size=y.shape)


def quantize_block(
    block: ReceivedBlock,
    sigma2_q: float,
    rng: "RngSeed | int | np.random.Generator",
) -> ReceivedBlock:
    """Quantized copy of one block; the input block is left untouched."""
    if sigma2_q <= 0.0:
        raise ValueError(f"sigma2_q must be > 0, got {sigma2_q}")
    y = quantize_vectors(block.y, sigma2_q, rng, complex_field=np.iscomplexobj(block.y))
    return ReceivedBlock(cell=block.cell, interval=block.interval, y=y)


def empirical_moments(
    config: SystemConfig,
    truth: HypothesisVector,
    n: int,
    rng: "RngSeed | int | np.random.Generator",
) -> tuple[np.ndarray, np.ndarray]:
    """Sample mean and covariance of the stacked received vector (K*M dims).

    The covariance is Hermitian in the complex field (E[(y-m)(y-m)^H]).
    Used to check the Gaussian surrogates against the sampler.
    """
    if n < 2:
        raise ValueError("need at least 2 intervals for a covariance estimate")
    y = sample_intervals(config, truth, n, rng).reshape(n, config.K * config.M)
    mean = y.mean(axis=0)
    centered = y - mean
    cov = (centered.conj().T @ centered) / (n - 1)
    if config.signal_field == "complex":
        return mean, cov
    return mean.real, cov.real
