"""Core system model for multi-cell type-based multiple access (TBMA).

Each cell hosts a random number of sensors per collection interval.  A sensor
signals its quantized measurement (one of ``M`` levels) by transmitting the
matching orthogonal preamble, so the per-cell edge node observes a noisy,
channel-weighted histogram of the measurements: the in-cell contributions
arrive through a line-of-sight-plus-scatter channel ``(mu_H, sigma2_H)`` and
every other cell leaks in through an interference channel ``(mu_G, sigma2_G)``.
A cloud processor can additionally collect quantized copies of every edge
node's vector over fronthaul links of ``C`` bit/s/Hz.

This module holds the shared value types (configuration, per-cell hypothesis
vectors, the correlated hypothesis prior) and the Gaussian surrogate builders
used by both the error-exponent analytics and the MAP detectors.  Surrogates
model the received vector under a fixed hypothesis as a Gaussian whose mean
collects the line-of-sight components and whose variance collects channel
scatter plus thermal noise:

    mean[m] = mu_H * lam * p_own(m)  + mu_G * lam * sum_other p_other(m)
    var[m]  = sigma2_H * lam * p_own(m) + sigma2_G * lam * sum_other p_other(m)
              + 1 / snr

with ``p_own`` the own-cell measurement distribution under the cell's bit and
``p_other`` each interferer's distribution under the interferer's own bit.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ConfigError",
    "UnsupportedConfigError",
    "HypothesisVector",
    "QoIPrior",
    "SystemConfig",
    "GaussianSurrogate",
    "all_hypotheses",
    "build_prior_from_rho",
    "validate_config",
    "load_config",
    "save_config",
    "edge_surrogate",
    "cloud_surrogate",
]


class ConfigError(ValueError):
    """Raised when a configuration violates a model invariant."""


class UnsupportedConfigError(ValueError):
    """Raised for configurations outside the implemented regime (not bugs)."""


# ---------------------------------------------------------------------------
# hypothesis bookkeeping
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class HypothesisVector:
    """One binary state bit per cell; cell 0 is the most significant bit."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.bits:
            raise ValueError("hypothesis vector needs at least one cell")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"bits must be 0/1, got {self.bits}")

    @property
    def n_cells(self) -> int:
        return len(self.bits)

    @property
    def index(self) -> int:
        """Lexicographic rank of the vector (cell 0 as MSB)."""
        i = 0
        for b in self.bits:
            i = (i << 1) | b
        return i

    @classmethod
    def from_index(cls, index: int, n_cells: int) -> "HypothesisVector":
        if not 0 <= index < 2**n_cells:
            raise ValueError(f"index {index} out of range for {n_cells} cells")
        bits = tuple((index >> (n_cells - 1 - c)) & 1 for c in range(n_cells))
        return cls(bits)

    def with_bit(self, cell: int, bit: int) -> "HypothesisVector":
        bits = list(self.bits)
        bits[cell] = bit
        return HypothesisVector(tuple(bits))

    def __getitem__(self, cell: int) -> int:
        return self.bits[cell]

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


def all_hypotheses(n_cells: int) -> tuple[HypothesisVector, ...]:
    """All 2**n_cells hypothesis vectors in lexicographic order."""
    return tuple(HypothesisVector.from_index(i, n_cells) for i in range(2**n_cells))


def _interference_patterns(n_cells: int, cell: int) -> tuple[tuple[int, ...], ...]:
    """Bit tuples for every cell except ``cell``, in lexicographic order."""
    others = n_cells - 1
    out = []
    for i in range(2**others):
        out.append(tuple((i >> (others - 1 - j)) & 1 for j in range(others)))
    return tuple(out)


def _insert_bit(pattern: tuple[int, ...], cell: int, bit: int) -> HypothesisVector:
    bits = list(pattern)
    bits.insert(cell, bit)
    return HypothesisVector(tuple(bits))


# ---------------------------------------------------------------------------
# prior over joint hypotheses
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QoIPrior:
    """Joint prior over the 2**K hypothesis vectors, indexed lexicographically.

    ``rho`` records the equal-bits probability when the prior came from the
    two-cell correlation model; it is ``None`` for explicit tables.
    """

    table: np.ndarray
    rho: float | None = None

    def __post_init__(self) -> None:
        table = np.asarray(self.table, dtype=float).copy()
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @property
    def n_cells(self) -> int:
        return int(round(math.log2(self.table.size)))

    @classmethod
    def uniform(cls, n_cells: int) -> "QoIPrior":
        n = 2**n_cells
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def from_table(cls, table: Sequence[float]) -> "QoIPrior":
        return cls(np.asarray(table, dtype=float))

    def prob(self, hyp: HypothesisVector) -> float:
        return float(self.table[hyp.index])

    def log_prob(self, hyp: HypothesisVector) -> float:
        p = self.table[hyp.index]
        return float(np.log(p)) if p > 0.0 else -np.inf

    def marginal(self, cell: int) -> tuple[float, float]:
        """(Pr[bit=0], Pr[bit=1]) for one cell."""
        k = self.n_cells
        p1 = sum(
            float(self.table[h.index]) for h in all_hypotheses(k) if h[cell] == 1
        )
        return 1.0 - p1, p1


def build_prior_from_rho(rho: float) -> QoIPrior:
    """Two-cell prior with Pr[equal bits] = rho; marginals are uniform.

    rho = 0.5 makes the two bits independent; rho = 1 forces them equal.
    """
    if not 0.0 <= rho <= 1.0:
        raise ConfigError(f"rho must lie in [0, 1], got {rho}")
    same = rho / 2.0
    diff = (1.0 - rho) / 2.0
    return QoIPrior(np.array([same, diff, diff, same]), rho=rho)


# ---------------------------------------------------------------------------
# system configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SystemConfig:
    """Static description of the network, channels, and measurement model.

    p0/p1 hold one length-M measurement distribution per cell (shape (K, M)):
    row c is the distribution of a cell-c sensor's measurement under that
    cell's bit 0 / bit 1.  ``snr`` is linear; JSON I/O uses dB.  ``C`` is the
    per-fronthaul capacity in bit/s/Hz (0 disables the cloud path).
    """

    K: int
    M: int
    lam: float
    snr: float
    mu_H: float
    sigma2_H: float
    mu_G: float
    sigma2_G: float
    C: float
    p0: np.ndarray
    p1: np.ndarray
    prior: QoIPrior
    signal_field: str = "real"

    def __post_init__(self) -> None:
        for name in ("p0", "p1"):
            arr = np.asarray(getattr(self, name), dtype=float).copy()
            if arr.ndim == 1:
                arr = arr[np.newaxis, :]
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def noise_var(self) -> float:
        return 1.0 / self.snr

    def p_table(self, cell: int, bit: int) -> np.ndarray:
        return (self.p0 if bit == 0 else self.p1)[cell]

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)


def validate_config(config: SystemConfig) -> list[str]:
    """Return all invariant violations (empty list means the config is valid)."""
    bad: list[str] = []
    if config.K < 1:
        bad.append(f"K must be >= 1, got {config.K}")
    if config.M < 1:
        bad.append(f"M must be >= 1, got {config.M}")
    if not config.lam > 0.0:
        bad.append(f"lambda must be > 0, got {config.lam}")
    if not config.snr > 0.0:
        bad.append(f"snr must be > 0 (linear scale), got {config.snr}")
    if config.sigma2_H < 0.0:
        bad.append(f"sigma2_H must be >= 0, got {config.sigma2_H}")
    if config.sigma2_G < 0.0:
        bad.append(f"sigma2_G must be >= 0, got {config.sigma2_G}")
    if config.C < 0.0:
        bad.append(f"C must be >= 0, got {config.C}")
    if not (math.isfinite(config.mu_H) and math.isfinite(config.mu_G)):
        bad.append("channel means must be finite")
    if config.signal_field not in ("real", "complex"):
        bad.append(f"signal_field must be 'real' or 'complex', got {config.signal_field!r}")

    for name in ("p0", "p1"):
        arr = getattr(config, name)
        if arr.shape != (config.K, config.M):
            bad.append(f"{name} must have shape (K, M)={config.K, config.M}, got {arr.shape}")
            continue
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            bad.append(f"{name} has entries outside [0, 1]")
        rowsum = arr.sum(axis=1)
        off = np.abs(rowsum - 1.0)
        if np.any(off > 1e-12):
            bad.append(f"{name} rows must sum to 1 within 1e-12 (max deviation {off.max():.3e})")

    table = config.prior.table
    if table.size != 2**config.K:
        bad.append(f"prior table must have 2**K={2**config.K} entries, got {table.size}")
    else:
        if np.any(table < 0.0):
            bad.append("prior table has negative entries")
        if abs(float(table.sum()) - 1.0) > 1e-12:
            bad.append(f"prior table must sum to 1 within 1e-12, got {table.sum()!r}")
    return bad


def require_valid(config: SystemConfig) -> None:
    problems = validate_config(config)
    if problems:
        raise ConfigError("; ".join(problems))


# ---------------------------------------------------------------------------
# JSON I/O
# ---------------------------------------------------------------------------


def config_to_dict(config: SystemConfig) -> dict:
    out = {
        "K": config.K,
        "M": config.M,
        "lambda": config.lam,
        "snr_db": 10.0 * math.log10(config.snr),
        "mu_H": config.mu_H,
        "sigma2_H": config.sigma2_H,
        "mu_G": config.mu_G,
        "sigma2_G": config.sigma2_G,
        "C_bit_s_hz": config.C,
        "p0": config.p0.tolist(),
        "p1": config.p1.tolist(),
        "signal_field": config.signal_field,
    }
    if config.prior.rho is not None:
        out["rho"] = config.prior.rho
    else:
        out["prior_table"] = config.prior.table.tolist()
    return out


def config_from_dict(data: dict) -> SystemConfig:
    try:
        K = int(data["K"])
        if "rho" in data:
            prior = build_prior_from_rho(float(data["rho"]))
            if K != 2:
                raise ConfigError("the rho prior model is defined for K=2 only")
        elif "prior_table" in data:
            prior = QoIPrior.from_table(data["prior_table"])
        else:
            prior = QoIPrior.uniform(K)
        config = SystemConfig(
            K=K,
            M=int(data["M"]),
            lam=float(data["lambda"]),
            snr=10.0 ** (float(data["snr_db"]) / 10.0),
            mu_H=float(data["mu_H"]),
            sigma2_H=float(data["sigma2_H"]),
            mu_G=float(data.get("mu_G", 0.0)),
            sigma2_G=float(data.get("sigma2_G", 0.0)),
            C=float(data.get("C_bit_s_hz", 0.0)),
            p0=np.asarray(data["p0"], dtype=float),
            p1=np.asarray(data["p1"], dtype=float),
            prior=prior,
            signal_field=str(data.get("signal_field", "real")),
        )
    except KeyError as exc:
        raise ConfigError(f"missing config field {exc}") from exc
    require_valid(config)
    return config


def load_config(path: str | Path) -> SystemConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))


def save_config(config: SystemConfig, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config_to_dict(config), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Gaussian surrogates
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GaussianSurrogate:
    """Gaussian stand-in for a received vector under one fixed hypothesis.

    ``diagonal_only`` marks surrogates whose covariance is diagonal by
    construction; the exponent code then uses the cheaper per-entry path.
    """

    mean: np.ndarray
    cov: np.ndarray
    diagonal_only: bool

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=float).copy()
        cov = np.asarray(self.cov, dtype=float).copy()
        if mean.ndim != 1 or cov.shape != (mean.size, mean.size):
            raise ValueError(f"mean/cov shapes do not agree: {mean.shape} vs {cov.shape}")
        cov = 0.5 * (cov + cov.T)  # enforce exact symmetry
        if np.any(np.diag(cov) <= 0.0):
            raise ValueError("surrogate covariance needs a strictly positive diagonal")
        if self.diagonal_only and np.any(cov != np.diag(np.diag(cov))):
            raise ValueError("diagonal_only surrogate has off-diagonal entries")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size

    @property
    def var(self) -> np.ndarray:
        return np.diag(self.cov)


def _interference_profile(config: SystemConfig, cell: int, hyp: HypothesisVector) -> np.ndarray:
    """sum over interferers c' != cell of p^{c'} under the interferer's own bit."""
    total = np.zeros(config.M)
    for other in range(config.K):
        if other == cell:
            continue
        total += config.p_table(other, hyp[other])
    return total


def edge_surrogate(config: SystemConfig, cell: int, hyp: HypothesisVector) -> GaussianSurrogate:
    """Gaussian surrogate for one edge node's received vector under ``hyp``.

    Mean and variance accumulate the own-cell signal, the out-of-cell
    interference under each interferer's own distribution, and thermal noise
    at 1/snr; the covariance is diagonal.
    """
    require_valid(config)
    if hyp.n_cells != config.K:
        raise ValueError(f"hypothesis has {hyp.n_cells} cells, config has {config.K}")
    if not 0 <= cell < config.K:
        raise ValueError(f"cell index {cell} out of range")
    own = config.p_table(cell, hyp[cell])
    leak = _interference_profile(config, cell, hyp)
    mean = config.mu_H * config.lam * own + config.mu_G * config.lam * leak
    var = (
        config.sigma2_H * config.lam * own
        + config.sigma2_G * config.lam * leak
        + config.noise_var
    )
    return GaussianSurrogate(mean, np.diag(var), diagonal_only=True)


def cloud_surrogate(
    config: SystemConfig,
    hyp: HypothesisVector,
    sigma2_q: Sequence[float],
) -> GaussianSurrogate:
    """Gaussian surrogate for the cloud's stacked quantized vector (K=2 only).

    Blocks follow the edge surrogates with the per-fronthaul quantization
    noise added on the diagonal.  The cross-cell covariance couples entry m of
    one block with entry m of the other through the line-of-sight products:

        cross[m] = lam * mu_H * mu_G * ( p0own(m)(1-p0own(m)) + p1own(m)(1-p1own(m)) )

    where pXown is cell X's distribution under its own bit.  The matrix is
    symmetrized before use.
    """
    if config.K != 2:
        raise UnsupportedConfigError(
            "cloud covariance is implemented for K=2 only; "
            f"got K={config.K} (edge analytics support any K)"
        )
    require_valid(config)
    s2q = [float(s) for s in sigma2_q]
    if len(s2q) != config.K:
        raise ValueError(f"need one sigma2_q per cell, got {len(s2q)}")
    if any(s < 0.0 for s in s2q):
        raise ValueError("sigma2_q must be >= 0")

    M = config.M
    mean = np.zeros(2 * M)
    cov = np.zeros((2 * M, 2 * M))
    for cell in range(2):
        g = edge_surrogate(config, cell, hyp)
        sl = slice(cell * M, (cell + 1) * M)
        mean[sl] = g.mean
        cov[sl, sl] = g.cov + s2q[cell] * np.eye(M)

    pa = config.p_table(0, hyp[0])
    pb = config.p_table(1, hyp[1])
    cross = config.lam * config.mu_H * config.mu_G * (pa * (1.0 - pa) + pb * (1.0 - pb))
    for m in range(M):
        cov[m, M + m] = cross[m]
        cov[M + m, m] = cross[m]
    return GaussianSurrogate(mean, cov, diagonal_only=False)
