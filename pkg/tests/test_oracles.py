import numpy as np
import pytest

import q3heat as qh
from q3heat.errors import NoConvergence, SingularSteadyState
from q3heat.oracles import gibbs_product_state, hermitian_basis, matrix_to_coords

from conftest import make_config, random_config


def fast_path(config):
    eig = qh.analytic_eigensystem(config.params)
    channels = qh.build_channels(config.params, eig)
    rates = qh.build_rate_matrices(channels, config)
    state = qh.solve_steady(rates)
    currents = qh.heat_currents(rates, state, eig)
    return state, currents


def test_hermitian_basis_is_orthonormal():
    basis = hermitian_basis()
    gram = np.einsum("aij,bij->ab", basis.conj(), basis)
    np.testing.assert_allclose(gram, np.eye(64), atol=1e-15)
    for b in basis:
        np.testing.assert_allclose(b, b.conj().T, atol=1e-15)


def test_generator_is_real_and_trace_conserving(fig2_config):
    L = qh.liouvillian_matrix(fig2_config)
    assert L.dtype == np.float64
    tau = np.zeros(64)
    tau[:8] = 1.0
    np.testing.assert_allclose(tau @ L, 0.0, atol=1e-18)


class TestLiouvillianOracle:
    def test_equal_temperatures_gibbs_and_zero_currents(self):
        config = make_config(0.9, 0.01, (0.4, 0.4, 0.4))
        sol = qh.liouvillian_oracle(config)
        eig = qh.analytic_eigensystem(config.params)
        np.testing.assert_allclose(sol.populations, eig.gibbs_populations(0.4), atol=1e-12)
        assert np.abs(sol.currents).max() <= 1e-14
        assert sol.coherence_max <= 1e-12

    def test_agrees_with_fast_path_on_examples(self, fig2_config, fig4a_config, fig4b_config):
        for config in (fig2_config, fig4a_config, fig4b_config):
            state, currents = fast_path(config)
            sol = qh.liouvillian_oracle(config)
            assert np.abs(sol.populations - state.populations).max() <= 1e-8
            q = currents.as_array()
            scale = max(np.abs(q).max(), np.abs(sol.currents).max())
            assert np.abs(q - sol.currents).max() <= 1e-8 * scale
            assert sol.coherence_max <= 1e-10
            assert sol.min_eigenvalue >= -1e-10

    def test_agrees_on_random_draws(self):
        rng = np.random.default_rng(41)
        for _ in range(20):
            config = random_config(rng)
            state, currents = fast_path(config)
            sol = qh.liouvillian_oracle(config)
            assert np.abs(sol.populations - state.populations).max() <= 1e-8
            q = currents.as_array()
            scale = max(np.abs(q).max(), np.abs(sol.currents).max(), 1e-30)
            assert np.abs(q - sol.currents).max() <= 1e-8 * scale
            assert sol.coherence_max <= 1e-10

    def test_detached_everything_is_singular(self):
        config = make_config(0.9, 0.01, (0.2, 0.1, 0.02), gamma=0.0)
        with pytest.raises(SingularSteadyState):
            qh.liouvillian_oracle(config)


class TestRelaxationOracle:
    def test_fixed_point_converges_immediately(self, fig2_config):
        state, _ = fast_path(fig2_config)
        eig = qh.analytic_eigensystem(fig2_config.params)
        rho0 = eig.U @ np.diag(state.populations) @ eig.U.T
        res = qh.relaxation_oracle(fig2_config, initial=rho0)
        assert res.doublings <= 2
        assert np.abs(res.populations - state.populations).max() <= 1e-9

    def test_converges_from_gibbs(self, fig2_config):
        state, _ = fast_path(fig2_config)
        res = qh.relaxation_oracle(fig2_config)
        assert res.residual < 1e-12
        assert np.abs(res.populations - state.populations).max() <= 1e-6
        assert res.trace_drift <= 1e-10

    def test_trace_preserved_from_coherent_start(self, fig4a_config):
        eig = qh.analytic_eigensystem(fig4a_config.params)
        rho0 = gibbs_product_state(eig, 0.3)
        # add a small real coherence to exercise the off-diagonal sector
        v = eig.U[:, 0:1] @ eig.U[:, 5:6].T
        rho0 = 0.98 * rho0 + 0.01 * (v + v.T) + 0.02 * np.eye(8) / 8
        x0 = matrix_to_coords(rho0.astype(complex))
        assert x0[:8].sum() == pytest.approx(1.0, abs=1e-12)
        res = qh.relaxation_oracle(fig4a_config, initial=rho0)
        assert res.trace_drift <= 1e-10
        state, _ = fast_path(fig4a_config)
        assert np.abs(res.populations - state.populations).max() <= 1e-6

    def test_no_convergence_reported_at_cap(self, fig2_config):
        with pytest.raises(NoConvergence) as err:
            qh.relaxation_oracle(fig2_config, t_max=1.0)
        assert "residual" in str(err.value)
