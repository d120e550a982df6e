import math

import numpy as np
import pytest

import q3heat as qh
from q3heat.errors import ChannelInconsistency

from conftest import random_config


def test_hamiltonian_structure():
    p = qh.DeviceParams.resonant(0.9, 0.01)
    H = qh.build_hamiltonian(p)
    assert H[0, 0] == pytest.approx(p.omega_R)        # |111> energy under resonance
    assert H[7, 0] == pytest.approx(p.g)              # <000|H|111> from the triple flip
    assert np.trace(H) == pytest.approx(0.0, abs=1e-15)
    assert np.array_equal(H, H.T)


def test_block_eigenvalues_closed_form():
    p = qh.DeviceParams.resonant(0.9, 0.01)
    eig = qh.analytic_eigensystem(p)
    assert eig.lam[3] == pytest.approx(-0.01, rel=1e-15)   # Lambda_4 = 0 level pair
    assert eig.lam[4] == pytest.approx(+0.01, rel=1e-15)
    assert eig.lam[7] == pytest.approx(math.sqrt(1 + 1e-4), rel=1e-15)
    assert np.all(np.diff(eig.lam) > 0)
    np.testing.assert_allclose(eig.lam + eig.lam[::-1], 0.0, atol=1e-15)


def test_analytic_matches_numeric_oracle():
    rng = np.random.default_rng(3)
    worst_vals = worst_vecs = worst_orth = worst_diag = 0.0
    for _ in range(300):
        cfg = random_config(rng)
        p = cfg.params
        eig = qh.analytic_eigensystem(p)
        H = qh.build_hamiltonian(p)
        vals, vecs = qh.numeric_diagonalization_oracle(H)
        worst_vals = max(worst_vals, np.abs(vals - eig.lam).max())
        sign = np.sign(np.sum(vecs * eig.U, axis=0))
        sign[sign == 0.0] = 1.0
        worst_vecs = max(worst_vecs, np.abs(vecs * sign - eig.U).max())
        worst_orth = max(worst_orth, np.abs(eig.U.T @ eig.U - np.eye(8)).max())
        worst_diag = max(worst_diag, np.abs(eig.U.T @ H @ eig.U - np.diag(eig.lam)).max())
    assert worst_vals <= 1e-10
    assert worst_vecs <= 1e-8
    assert worst_orth <= 1e-12
    assert worst_diag <= 1e-10


def test_numeric_oracle_basics():
    vals, _ = qh.numeric_diagonalization_oracle(np.eye(8))
    np.testing.assert_allclose(vals, 1.0)
    # an isolated 2x2 block embedded in an otherwise diagonal matrix
    H = np.diag([5.0] * 8)
    H[0, 0] = 1.0
    H[1, 1] = -1.0
    H[0, 1] = H[1, 0] = 0.1
    vals, _ = qh.numeric_diagonalization_oracle(H)
    assert vals[0] == pytest.approx(-math.sqrt(1 + 0.01), rel=1e-14)


def test_coupling_limit_of_mixing_angles():
    p = qh.DeviceParams.resonant(0.9, 1e-8)
    eig = qh.analytic_eigensystem(p)
    assert np.all(eig.theta[:3] < 1e-7)
    assert eig.theta[3] == pytest.approx(math.pi / 4, rel=1e-12)


def test_bohr_frequency_closed_forms():
    p = qh.DeviceParams.resonant(0.9, 0.01)
    freqs = qh.bohr_frequencies(p)
    g, w_m = p.g, p.omega_M
    assert freqs[("M", 3)] == pytest.approx(math.sqrt(w_m**2 + g**2) - g, rel=1e-14)
    assert freqs[("M", 4)] == pytest.approx(math.sqrt(w_m**2 + g**2) + g, rel=1e-14)
    assert freqs[("R", 2)] == pytest.approx(math.sqrt(1 + g * g) + g, rel=1e-14)
    assert all(v > 0 for v in freqs.values())
    # telescoping sums within a bath
    root1 = math.sqrt(p.omega_R**2 + g * g)
    for mu in ("L", "M"):
        assert freqs[(mu, 1)] + freqs[(mu, 2)] == pytest.approx(2 * root1, rel=1e-13)


def test_channel_frequencies_match_level_spacings():
    rng = np.random.default_rng(5)
    for _ in range(50):
        cfg = random_config(rng)
        eig = qh.analytic_eigensystem(cfg.params)
        for ch in qh.build_channels(cfg.params, eig):
            for upper, lower, _s in ch.pairs:
                spacing = eig.lam[upper - 1] - eig.lam[lower - 1]
                assert spacing == pytest.approx(ch.frequency, abs=1e-12)


def test_channels_partition_level_pairs():
    p = qh.DeviceParams.resonant(0.9, 0.01)
    channels = qh.build_channels(p)
    assert len(channels) == 12
    for bath in "LMR":
        seen = set()
        for ch in channels:
            if ch.bath != bath:
                continue
            for upper, lower, _s in ch.pairs:
                assert (upper, lower) not in seen
                seen.add((upper, lower))
        assert len(seen) == 8  # 8 directed pairs per bath, 24 in total


def test_commutator_identity_all_channels():
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(100):
        cfg = random_config(rng)
        H = qh.build_hamiltonian(cfg.params)
        eig = qh.analytic_eigensystem(cfg.params)
        for ch in qh.build_channels(cfg.params, eig):
            V = ch.operator_product_basis(eig)
            worst = max(worst, np.abs(H @ V - V @ H + ch.frequency * V).max())
    assert worst <= 1e-12


def test_decomposition_reconstructs_coupling_operators():
    rng = np.random.default_rng(13)
    worst = 0.0
    for _ in range(100):
        cfg = random_config(rng)
        eig = qh.analytic_eigensystem(cfg.params)
        channels = qh.build_channels(cfg.params, eig)
        for lab in "LMR":
            recon = np.zeros((8, 8))
            for ch in channels:
                if ch.bath == lab:
                    V = ch.operator_eigenbasis()
                    recon += V + V.T
            target = eig.U.T @ qh.coupling_operator(lab) @ eig.U
            worst = max(worst, np.abs(recon - target).max())
    assert worst <= 1e-10


def test_amplitudes_match_numeric_projection():
    """sin(alpha) must equal the matrix element of sigma_x between the
    numerically diagonalized eigenvectors (signs aligned to the analytic
    columns), for every channel pair."""
    rng = np.random.default_rng(17)
    for _ in range(25):
        cfg = random_config(rng)
        eig = qh.analytic_eigensystem(cfg.params)
        H = qh.build_hamiltonian(cfg.params)
        _vals, vecs = qh.numeric_diagonalization_oracle(H)
        sign = np.sign(np.sum(vecs * eig.U, axis=0))
        sign[sign == 0.0] = 1.0
        vecs = vecs * sign
        for ch in qh.build_channels(cfg.params, eig):
            sx = qh.coupling_operator(ch.bath)
            for upper, lower, s in ch.pairs:
                elem = float(vecs[:, lower - 1] @ sx @ vecs[:, upper - 1])
                assert elem == pytest.approx(s * ch.amplitude, abs=1e-10)


def test_alpha_angles_published_pairings():
    p = qh.DeviceParams.resonant(0.9, 0.01)
    eig = qh.analytic_eigensystem(p)
    t1, t2, t3, t4 = eig.theta
    alphas = qh.alpha_angles(eig.theta)
    assert math.sin(alphas[("L", 1)]) == pytest.approx(math.cos(t1 - t3), rel=1e-14)
    assert math.sin(alphas[("L", 2)]) == pytest.approx(math.sin(t3 - t1), rel=1e-12)
    assert math.sin(alphas[("M", 2)]) == pytest.approx(math.sin(t1 - t2), rel=1e-12)
    assert math.sin(alphas[("M", 3)]) == pytest.approx(math.cos(t3 - t4), rel=1e-14)
    assert math.sin(alphas[("R", 1)]) == pytest.approx(math.sin(t1 + t4), rel=1e-14)
    assert math.sin(alphas[("R", 4)]) == pytest.approx(math.cos(t2 + t3), rel=1e-14)


def test_amplitudes_bounded_and_weak_coupling_limit():
    p = qh.DeviceParams.resonant(0.9, 1e-7)
    channels = qh.build_channels(p)
    freqs = {(-1, -1): 0.0}
    for ch in channels:
        assert -1.0 <= ch.amplitude <= 1.0
        freqs[(ch.bath, ch.index)] = ch.frequency
    # channels with surviving amplitude converge to the bare frequencies
    for mu, bare in (("L", p.omega_L), ("M", p.omega_M)):
        for l in (1, 3, 4):
            assert freqs[(mu, l)] == pytest.approx(bare, abs=1e-6)
    for l in (1, 2):
        assert freqs[("R", l)] == pytest.approx(p.omega_R, abs=1e-6)
    assert freqs[("R", 4)] == pytest.approx(p.omega_R, abs=1e-6)


def test_corrupted_pair_table_raises(monkeypatch):
    p = qh.DeviceParams.resonant(0.9, 0.01)
    broken = dict(qh.CHANNEL_PAIRS)
    broken[("L", 1)] = ((4, 1, -1), (8, 6, +1))  # wrong spacing for the L1 frequency
    monkeypatch.setattr("q3heat.eigensystem.CHANNEL_PAIRS", broken)
    with pytest.raises(ChannelInconsistency):
        qh.build_channels(p)
