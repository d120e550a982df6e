"""The compiled kernel and the numpy fallback must be interchangeable."""

import numpy as np
import pytest

import q3heat as qh
from q3heat._backend import available_backends

from conftest import random_config

BACKENDS = available_backends()


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernel not built")
def test_backends_agree_on_random_grids():
    rng = np.random.default_rng(101)
    ev = qh.BatchEvaluator(qh.DeviceParams.resonant(0.9, 0.01))
    n = 500
    temps = rng.uniform(0.0, 1.5, (n, 3))          # includes exact zeros
    temps[::17] = temps[::17].round(2)
    gammas = 10.0 ** rng.uniform(-5, -3, (n, 3))
    gammas[::29, 0] = 0.0                          # some detached-L points
    ohmic = rng.random((n, 3)) < 0.3
    out = {
        name: fn(ev.lam, ev.ch_bath, ev.ch_freq, ev.ch_a2, ev.ch_pairs, temps, gammas, ohmic)
        for name, fn in BACKENDS.items()
    }
    p_py, q_py, r_py, _c, s_py = out["python"]
    p_cy, q_cy, r_cy, _c2, s_cy = out["cython"]
    np.testing.assert_array_equal(s_py, s_cy)
    ok = s_py == 0
    assert ok.sum() > n * 0.9
    assert np.abs(p_py[ok] - p_cy[ok]).max() <= 1e-13
    qscale = np.maximum(np.abs(q_py[ok]), np.abs(q_cy[ok])).max(axis=1, keepdims=True)
    assert (np.abs(q_py[ok] - q_cy[ok]) / np.maximum(qscale, 1e-300)).max() <= 1e-10


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernel not built")
def test_backends_agree_across_devices():
    rng = np.random.default_rng(103)
    for _ in range(40):
        config = random_config(rng)
        ev = qh.BatchEvaluator(config.params)
        temps = rng.uniform(0.02, 1.0, (7, 3))
        gammas = np.tile([b.gamma for b in config.baths], (7, 1))
        ohmic = np.zeros((7, 3), bool)
        results = {
            name: fn(ev.lam, ev.ch_bath, ev.ch_freq, ev.ch_a2, ev.ch_pairs, temps, gammas, ohmic)
            for name, fn in BACKENDS.items()
        }
        assert np.abs(results["python"][0] - results["cython"][0]).max() <= 1e-12


def test_selected_backend_matches_reference_everywhere():
    rng = np.random.default_rng(107)
    for _ in range(30):
        config = random_config(rng)
        eig = qh.analytic_eigensystem(config.params)
        channels = qh.build_channels(config.params, eig)
        rates = qh.build_rate_matrices(channels, config)
        state = qh.solve_steady(rates)
        q_ref = qh.heat_currents(rates, state, eig).as_array()
        ev = qh.BatchEvaluator(config.params, eig)
        temps = np.array([[b.temperature for b in config.baths]])
        pops, currents, status = ev.solve_temperatures(config, temps)
        assert status[0] == 0
        assert np.abs(pops[0] - state.populations).max() <= 1e-12
        scale = max(np.abs(q_ref).max(), 1e-300)
        assert np.abs(currents[0] - q_ref).max() <= 1e-10 * scale
