"""Value types, config validation, JSON I/O, and the Gaussian surrogates."""

import json
import math

import numpy as np
import pytest
from helpers import random_config

from tbma import (
    ConfigError,
    GaussianSurrogate,
    HypothesisVector,
    QoIPrior,
    SystemConfig,
    UnsupportedConfigError,
    all_hypotheses,
    build_prior_from_rho,
    cloud_surrogate,
    config_from_dict,
    config_to_dict,
    edge_surrogate,
    load_config,
    recipes,
    save_config,
    validate_config,
)

SNR_MINUS_1DB = 10.0 ** (-0.1)


# ---------------------------------------------------------------------------
# hypothesis vectors
# ---------------------------------------------------------------------------


def test_hypothesis_index_uses_cell0_as_msb():
    assert HypothesisVector((1, 0)).index == 2
    assert HypothesisVector((0, 1)).index == 1
    assert str(HypothesisVector.from_index(2, 2)) == "10"


@pytest.mark.parametrize("n_cells", [1, 2, 3, 4])
def test_hypothesis_index_round_trip(n_cells):
    hyps = all_hypotheses(n_cells)
    assert len(hyps) == 2**n_cells
    for i, h in enumerate(hyps):
        assert h.index == i
        assert HypothesisVector.from_index(i, n_cells) == h
    # lexicographic order
    assert [h.bits for h in hyps] == sorted(h.bits for h in hyps)


def test_hypothesis_bit_edit_and_validation():
    h = HypothesisVector((0, 1, 0))
    assert h.with_bit(2, 1).bits == (0, 1, 1)
    assert h.bits == (0, 1, 0)
    assert h[1] == 1
    with pytest.raises(ValueError):
        HypothesisVector((0, 2))
    with pytest.raises(ValueError):
        HypothesisVector(())
    with pytest.raises(ValueError):
        HypothesisVector.from_index(4, 2)


# ---------------------------------------------------------------------------
# priors
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "rho, table",
    [
        (0.5, [0.25, 0.25, 0.25, 0.25]),
        (1.0, [0.5, 0.0, 0.0, 0.5]),
        (0.8, [0.4, 0.1, 0.1, 0.4]),
    ],
)
def test_rho_prior_tables(rho, table):
    prior = build_prior_from_rho(rho)
    np.testing.assert_allclose(prior.table, table, atol=1e-15)
    assert prior.rho == rho
    # marginals stay uniform for every rho
    for cell in (0, 1):
        np.testing.assert_allclose(prior.marginal(cell), (0.5, 0.5), atol=1e-15)


def test_rho_out_of_range():
    with pytest.raises(ConfigError):
        build_prior_from_rho(1.2)
    with pytest.raises(ConfigError):
        build_prior_from_rho(-0.1)


def test_prior_prob_and_log_prob():
    prior = build_prior_from_rho(1.0)
    assert prior.prob(HypothesisVector((0, 0))) == 0.5
    assert prior.prob(HypothesisVector((0, 1))) == 0.0
    assert prior.log_prob(HypothesisVector((0, 1))) == -math.inf
    assert prior.log_prob(HypothesisVector((1, 1))) == pytest.approx(math.log(0.5))
    uni = QoIPrior.uniform(3)
    assert uni.table.size == 8
    assert uni.prob(HypothesisVector((1, 0, 1))) == pytest.approx(0.125)


def test_prior_table_is_read_only():
    prior = build_prior_from_rho(0.5)
    with pytest.raises(ValueError):
        prior.table[0] = 1.0


# ---------------------------------------------------------------------------
# config validation
# ---------------------------------------------------------------------------


def test_fig2_config_is_valid():
    assert validate_config(recipes.fig2_config()) == []
    assert validate_config(recipes.fig3_config()) == []
    assert validate_config(recipes.desk_config()) == []


def test_validate_catches_bad_row_sum():
    cfg = recipes.desk_config().replace(p0=np.array([[0.5, 0.6]]))
    problems = validate_config(cfg)
    assert any("p0" in p and "sum to 1" in p for p in problems)


def test_validate_catches_negative_lambda():
    problems = validate_config(recipes.desk_config().replace(lam=-1.0))
    assert any("lambda" in p for p in problems)


@pytest.mark.parametrize(
    "changes, needle",
    [
        (dict(M=0), "M must be"),
        (dict(K=0), "K must be"),
        (dict(snr=0.0), "snr"),
        (dict(sigma2_H=-0.5), "sigma2_H"),
        (dict(sigma2_G=-0.5), "sigma2_G"),
        (dict(C=-1.0), "C must be"),
        (dict(mu_H=float("nan")), "finite"),
        (dict(signal_field="quaternion"), "signal_field"),
    ],
)
def test_validate_catches_field_violations(changes, needle):
    cfg = recipes.desk_config().replace(**changes)
    assert any(needle in p for p in validate_config(cfg))


def test_validate_catches_probability_range_and_prior():
    cfg = recipes.desk_config().replace(p0=np.array([[1.4, -0.4]]))
    assert any("outside [0, 1]" in p for p in validate_config(cfg))

    bad_prior = recipes.fig2_config().replace(prior=QoIPrior.from_table([0.5, 0.5]))
    assert any("prior table" in p for p in validate_config(bad_prior))
    neg_prior = recipes.fig2_config().replace(
        prior=QoIPrior.from_table([0.7, -0.2, 0.3, 0.2])
    )
    assert any("negative" in p for p in validate_config(neg_prior))
    off_sum = recipes.fig2_config().replace(
        prior=QoIPrior.from_table([0.3, 0.3, 0.3, 0.2])
    )
    assert any("sum to 1" in p for p in validate_config(off_sum))


def test_validate_catches_shape_mismatch():
    cfg = recipes.fig2_config().replace(p0=np.array([[0.9, 0.1]]))
    assert any("shape" in p for p in validate_config(cfg))


# ---------------------------------------------------------------------------
# JSON round trip
# ---------------------------------------------------------------------------


def test_config_json_round_trip_with_rho(tmp_path):
    cfg = recipes.fig3_config()
    path = tmp_path / "fig3.json"
    save_config(cfg, path)
    data = json.loads(path.read_text())
    assert data["lambda"] == 4.0
    assert data["snr_db"] == pytest.approx(-1.0)
    assert data["C_bit_s_hz"] == 2.0
    assert data["rho"] == 0.8
    assert "prior_table" not in data

    back = load_config(path)
    assert back.K == cfg.K and back.M == cfg.M
    assert back.snr == pytest.approx(cfg.snr)
    np.testing.assert_allclose(back.p0, cfg.p0)
    np.testing.assert_allclose(back.prior.table, cfg.prior.table)


def test_config_json_round_trip_with_table(tmp_path):
    prior = QoIPrior.from_table([0.1, 0.2, 0.3, 0.4])
    cfg = recipes.fig2_config().replace(prior=prior)
    path = tmp_path / "cfg.json"
    save_config(cfg, path)
    data = json.loads(path.read_text())
    assert data["prior_table"] == [0.1, 0.2, 0.3, 0.4]
    back = load_config(path)
    np.testing.assert_allclose(back.prior.table, prior.table)


def test_config_from_dict_missing_field():
    with pytest.raises(ConfigError, match="missing config field"):
        config_from_dict({"K": 1})


def test_load_config_rejects_invalid(tmp_path):
    data = config_to_dict(recipes.desk_config())
    data["lambda"] = -4.0
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    with pytest.raises(ConfigError):
        load_config(path)


def test_rho_prior_requires_two_cells():
    data = config_to_dict(recipes.desk_config())
    data["rho"] = 0.5
    with pytest.raises(ConfigError, match="K=2"):
        config_from_dict(data)


# ---------------------------------------------------------------------------
# edge surrogate
# ---------------------------------------------------------------------------


def test_edge_surrogate_hand_example():
    # K=1, M=2, lam=4, mu_H=1, s2H=1, SNR=-1 dB, p0=[0.9, 0.1], bit 0
    cfg = recipes.desk_config(mu_H=1.0)
    g = edge_surrogate(cfg, 0, HypothesisVector((0,)))
    np.testing.assert_allclose(g.mean, [3.6, 0.4], rtol=1e-12)
    np.testing.assert_allclose(g.var, np.array([3.6, 0.4]) + 10.0**0.1, rtol=1e-12)
    assert g.diagonal_only


def test_edge_surrogate_low_activity_limit():
    # lam -> 0: pure-noise vector (a limit; lam itself must stay positive)
    cfg = recipes.desk_config(lam=1e-12)
    g = edge_surrogate(cfg, 0, HypothesisVector((0,)))
    np.testing.assert_allclose(g.mean, 0.0, atol=1e-11)
    np.testing.assert_allclose(g.var, cfg.noise_var, atol=1e-11)


def test_edge_surrogate_ignores_interferers_without_coupling():
    cfg = recipes.fig2_config(sigma2_G=0.0)  # mu_G = 0 as well
    ref = edge_surrogate(cfg, 0, HypothesisVector((0, 0)))
    alt = edge_surrogate(cfg, 0, HypothesisVector((0, 1)))
    np.testing.assert_array_equal(ref.mean, alt.mean)
    np.testing.assert_array_equal(ref.cov, alt.cov)


def test_edge_surrogate_noise_floor_and_energy_accounting():
    rng = np.random.default_rng(101)
    for _ in range(100):
        K = int(rng.integers(1, 4))
        M = int(rng.integers(1, 5))
        cfg = random_config(rng, K=K, M=M)
        hyp = HypothesisVector(tuple(rng.integers(0, 2, size=K)))
        for cell in range(K):
            g = edge_surrogate(cfg, cell, hyp)
            assert np.all(g.var >= cfg.noise_var - 1e-12)
            total = cfg.lam * (cfg.mu_H + (K - 1) * cfg.mu_G)
            assert np.sum(g.mean) == pytest.approx(total, abs=1e-9)


def test_edge_surrogate_alphabet_permutation_equivariance():
    rng = np.random.default_rng(102)
    for _ in range(100):
        M = int(rng.integers(2, 5))
        cfg = random_config(rng, K=2, M=M)
        perm = rng.permutation(M)
        swapped = cfg.replace(p0=cfg.p0[:, perm], p1=cfg.p1[:, perm])
        hyp = HypothesisVector(tuple(rng.integers(0, 2, size=2)))
        g = edge_surrogate(cfg, 0, hyp)
        gp = edge_surrogate(swapped, 0, hyp)
        np.testing.assert_allclose(gp.mean, g.mean[perm], rtol=1e-12)
        np.testing.assert_allclose(gp.var, g.var[perm], rtol=1e-12)


def test_edge_surrogate_rejects_bad_indices():
    cfg = recipes.fig2_config()
    with pytest.raises(ValueError, match="cells"):
        edge_surrogate(cfg, 0, HypothesisVector((0,)))
    with pytest.raises(ValueError, match="cell index"):
        edge_surrogate(cfg, 2, HypothesisVector((0, 0)))
    with pytest.raises(ConfigError):
        edge_surrogate(cfg.replace(lam=-1.0), 0, HypothesisVector((0, 0)))


# ---------------------------------------------------------------------------
# cloud surrogate
# ---------------------------------------------------------------------------


def test_cloud_surrogate_hand_example():
    # K=2, M=2, lam=4, mu_H=mu_G=1, both cells on bit 0 with p=[0.9, 0.1]:
    # cross entry = 4*1*1*(0.9*0.1 + 0.9*0.1) = 0.72
    cfg = recipes.fig2_config(mu_G=1.0)
    g = cloud_surrogate(cfg, HypothesisVector((0, 0)), (0.0, 0.0))
    assert g.cov[0, 2] == pytest.approx(0.72, rel=1e-12)
    assert g.cov[1, 3] == pytest.approx(0.72, rel=1e-12)
    assert g.cov[2, 0] == g.cov[0, 2]
    assert g.cov[0, 3] == 0.0 and g.cov[1, 2] == 0.0
    assert not g.diagonal_only


def test_cloud_surrogate_block_diagonal_without_los_leak():
    cfg = recipes.fig2_config(sigma2_G=1.5)  # mu_G = 0
    s2q = (0.3, 0.7)
    g = cloud_surrogate(cfg, HypothesisVector((1, 0)), s2q)
    M = cfg.M
    np.testing.assert_array_equal(g.cov[:M, M:], 0.0)
    for cell, s in enumerate(s2q):
        ge = edge_surrogate(cfg, cell, HypothesisVector((1, 0)))
        sl = slice(cell * M, (cell + 1) * M)
        np.testing.assert_allclose(g.mean[sl], ge.mean, rtol=1e-12)
        np.testing.assert_allclose(g.cov[sl, sl], ge.cov + s * np.eye(M), rtol=1e-12)


def test_cloud_surrogate_zero_quantization_recovers_edge_blocks():
    cfg = recipes.fig3_config()
    hyp = HypothesisVector((0, 1))
    g = cloud_surrogate(cfg, hyp, (0.0, 0.0))
    for cell in range(2):
        ge = edge_surrogate(cfg, cell, hyp)
        sl = slice(cell * cfg.M, (cell + 1) * cfg.M)
        np.testing.assert_allclose(np.diag(g.cov[sl, sl]), ge.var, rtol=1e-12)


def test_cloud_surrogate_rejects_unsupported():
    rng = np.random.default_rng(3)
    cfg3 = random_config(rng, K=3, M=2)
    with pytest.raises(UnsupportedConfigError, match="K=2"):
        cloud_surrogate(cfg3, HypothesisVector((0, 0, 0)), (0.1, 0.1, 0.1))
    cfg = recipes.fig2_config()
    with pytest.raises(ValueError, match="per cell"):
        cloud_surrogate(cfg, HypothesisVector((0, 0)), (0.1,))
    with pytest.raises(ValueError, match=">= 0"):
        cloud_surrogate(cfg, HypothesisVector((0, 0)), (-0.1, 0.1))


# ---------------------------------------------------------------------------
# surrogate container
# ---------------------------------------------------------------------------


def test_surrogate_rejects_degenerate_inputs():
    with pytest.raises(ValueError, match="shapes"):
        GaussianSurrogate(np.zeros(2), np.zeros((3, 3)), diagonal_only=True)
    with pytest.raises(ValueError, match="positive diagonal"):
        GaussianSurrogate(np.zeros(2), np.diag([1.0, 0.0]), diagonal_only=True)
    with pytest.raises(ValueError, match="off-diagonal"):
        GaussianSurrogate(np.zeros(2), np.array([[1.0, 0.2], [0.2, 1.0]]), diagonal_only=True)


def test_surrogate_symmetrizes_and_freezes():
    cov = np.array([[2.0, 0.3], [0.1, 1.0]])
    g = GaussianSurrogate(np.zeros(2), cov, diagonal_only=False)
    assert g.cov[0, 1] == g.cov[1, 0] == pytest.approx(0.2)
    with pytest.raises(ValueError):
        g.mean[0] = 1.0
    assert g.dim == 2
