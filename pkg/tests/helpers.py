"""Shared test utilities: oracle integrals and randomized model builders."""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from tbma import GaussianSurrogate, QoIPrior, SystemConfig


def scalar_g(mu: float, var: float) -> GaussianSurrogate:
    return GaussianSurrogate(np.array([float(mu)]), np.array([[float(var)]]), diagonal_only=True)


def diag_g(mean, var) -> GaussianSurrogate:
    mean = np.asarray(mean, dtype=float)
    return GaussianSurrogate(mean, np.diag(np.asarray(var, dtype=float)), diagonal_only=True)


def quad_overlap(m0: float, v0: float, m1: float, v1: float, alpha: float) -> float:
    """int f0^alpha f1^(1-alpha) dy for scalar Gaussians, by adaptive quadrature."""

    def integrand(y: float) -> float:
        l0 = -0.5 * ((y - m0) ** 2 / v0 + math.log(2.0 * math.pi * v0))
        l1 = -0.5 * ((y - m1) ** 2 / v1 + math.log(2.0 * math.pi * v1))
        return math.exp(alpha * l0 + (1.0 - alpha) * l1)

    lo = min(m0 - 14.0 * math.sqrt(v0), m1 - 14.0 * math.sqrt(v1))
    hi = max(m0 + 14.0 * math.sqrt(v0), m1 + 14.0 * math.sqrt(v1))
    value, _ = quad(integrand, lo, hi, limit=300)
    return value


def quad_chernoff(m0: float, v0: float, m1: float, v1: float) -> float:
    """-log min_alpha of the overlap integral; the quadrature oracle for
    chernoff_information on scalar Gaussians."""
    res = minimize_scalar(
        lambda a: math.log(quad_overlap(m0, v0, m1, v1, a)),
        bounds=(0.0, 1.0),
        method="bounded",
        options={"xatol": 1e-10},
    )
    return -float(res.fun)


def random_diag_pair(rng: np.random.Generator, dim: int | None = None):
    if dim is None:
        dim = int(rng.integers(1, 5))
    mk = lambda: diag_g(rng.normal(0.0, 2.0, size=dim), rng.uniform(0.2, 5.0, size=dim))
    return mk(), mk()


def random_p_tables(rng: np.random.Generator, K: int, M: int) -> tuple[np.ndarray, np.ndarray]:
    p0 = rng.dirichlet(np.ones(M), size=K)
    p1 = rng.dirichlet(np.ones(M), size=K)
    return p0, p1


def random_config(
    rng: np.random.Generator,
    K: int = 2,
    M: int = 2,
    **overrides,
) -> SystemConfig:
    """Random valid config; channel scales kept moderate so solves stay tame."""
    p0, p1 = random_p_tables(rng, K, M)
    prior = QoIPrior.from_table(rng.dirichlet(np.ones(2**K)))
    base = dict(
        K=K,
        M=M,
        lam=float(rng.uniform(1.0, 10.0)),
        snr=float(rng.uniform(0.3, 5.0)),
        mu_H=float(rng.normal(0.0, 1.0)),
        sigma2_H=float(rng.uniform(0.2, 3.0)),
        mu_G=float(rng.normal(0.0, 0.5)),
        sigma2_G=float(rng.uniform(0.0, 2.0)),
        C=float(rng.uniform(0.5, 4.0)),
        p0=p0,
        p1=p1,
        prior=prior,
        signal_field="real",
    )
    base.update(overrides)
    return SystemConfig(**base)


def random_cloud_config(rng: np.random.Generator, M: int = 2, **overrides) -> SystemConfig:
    """Random K=2 config whose cloud covariances are all positive definite.

    The printed cross-covariance can outgrow the (scatter-plus-noise) diagonal
    when both line-of-sight gains are large, which the library reports as a
    numerical error; property tests about cloud behaviour sample from the
    well-posed regime instead.
    """
    from tbma import all_hypotheses, cloud_surrogate

    while True:
        cfg = random_config(rng, K=2, M=M, **overrides)
        try:
            for hyp in all_hypotheses(2):
                np.linalg.cholesky(cloud_surrogate(cfg, hyp, (0.0, 0.0)).cov)
        except np.linalg.LinAlgError:
            continue
        return cfg
