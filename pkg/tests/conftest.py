import pathlib

import numpy as np
import pytest

import q3heat as qh

CONFIG_DIR = pathlib.Path(__file__).resolve().parents[1] / "configs"
CONFIG_FILES = sorted(CONFIG_DIR.glob("fig*.json"))


def make_config(omega_L, g, temps, gamma=1e-4, spectrum="flat", gammas=None):
    params = qh.DeviceParams.resonant(omega_L, g)
    gammas = gammas if gammas is not None else (gamma, gamma, gamma)
    baths = [
        qh.BathSpec(lab, t, gm, qh.Spectrum(spectrum))
        for lab, t, gm in zip("LMR", temps, gammas)
    ]
    return qh.validate_params(params, baths)


def random_config(rng: np.random.Generator) -> qh.Config:
    """A valid random draw: resonant device, comfortably non-degenerate."""
    omega_L = rng.uniform(0.55, 0.95)
    g = rng.uniform(0.05, 0.5) * (1.0 - omega_L)
    temps = rng.uniform(0.02, 1.0, 3)
    gammas = 10.0 ** rng.uniform(-5, -3, 3)
    return make_config(omega_L, g, temps, gammas=tuple(gammas))


@pytest.fixture
def fig2_config() -> qh.Config:
    return make_config(0.9, 0.01, (0.2, 0.1, 0.02))


@pytest.fixture
def fig3a_config() -> qh.Config:
    return make_config(0.9, 0.08, (0.4, 0.08, 0.12))


@pytest.fixture
def fig4a_config() -> qh.Config:
    return make_config(0.6, 0.32, (0.25, 0.4, 0.2))


@pytest.fixture
def fig4b_config() -> qh.Config:
    return make_config(0.6, 0.32, (0.45, 0.6, 0.4), spectrum="ohmic")


@pytest.fixture
def fig5_config() -> qh.Config:
    return make_config(0.9, 0.08, (0.18, 0.2, 0.3))
