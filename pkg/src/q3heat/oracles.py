"""Independent cross-checks of the fast rate-matrix solver.

Both oracles work with the full 64-dimensional master-equation generator
built from the Hamiltonian commutator and the twelve channel dissipators,
never with the 8x8 population rate matrices:

* :func:`liouvillian_oracle` finds the generator's null vector directly
  (SVD) and also certifies that steady coherences vanish;
* :func:`relaxation_oracle` propagates an initial state with the exact
  exponential of the generator, doubling the time step until the flow
  stops moving.

The generator is represented over a Hermitian operator basis, which makes
it a real 64x64 matrix. Dissipators use the half-convention Lindblad form
(sandwich at weight 1, anticommutator at 1/2) so that population dynamics
carry exactly the absorption/emission rates of the rate-matrix lane; a
doubled convention would rescale every current uniformly without moving
any dimensionless result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .eigensystem import (
    EigenSystem,
    TransitionChannel,
    analytic_eigensystem,
    build_channels,
    build_hamiltonian,
)
from .errors import NoConvergence, SingularSteadyState
from .model import BATH_LABELS, Config, damping_rate, thermal_occupation

NULLITY_GAP = 1e-10
RELAX_RESIDUAL = 1e-12
TRACE_TOL = 1e-10


@lru_cache(maxsize=1)
def hermitian_basis() -> np.ndarray:
    """Orthonormal basis of Hermitian 8x8 matrices: diagonals, then real and
    imaginary off-diagonal combinations, 64 elements total."""
    mats = []
    for k in range(8):
        E = np.zeros((8, 8), dtype=complex)
        E[k, k] = 1.0
        mats.append(E)
    inv = 1.0 / math.sqrt(2.0)
    for j in range(8):
        for k in range(j + 1, 8):
            E = np.zeros((8, 8), dtype=complex)
            E[j, k] = E[k, j] = inv
            mats.append(E)
    for j in range(8):
        for k in range(j + 1, 8):
            E = np.zeros((8, 8), dtype=complex)
            E[j, k] = 1j * inv
            E[k, j] = -1j * inv
            mats.append(E)
    return np.array(mats)


def _channel_weights(ch: TransitionChannel, config: Config) -> tuple[float, float]:
    """(J_minus, J_plus): emission and absorption spectral weights of a channel."""
    bath = config.bath(ch.bath)
    if bath.gamma == 0.0:
        return 0.0, 0.0
    gw = damping_rate(bath, ch.frequency)
    occ = thermal_occupation(ch.frequency, bath.temperature)
    return gw * (occ + 1.0), gw * occ


def bath_dissipator_apply(config: Config, eig: EigenSystem, channels, label: str, rho: np.ndarray) -> np.ndarray:
    """Apply one bath's dissipator to a density matrix (product basis)."""
    out = np.zeros_like(rho)
    for ch in channels:
        if ch.bath != label:
            continue
        jm, jp = _channel_weights(ch, config)
        if jm == 0.0 and jp == 0.0:
            continue
        V = ch.operator_product_basis(eig)
        VtV = V.T @ V
        VVt = V @ V.T
        out = out + jm * (V @ rho @ V.T - 0.5 * (VtV @ rho + rho @ VtV))
        out = out + jp * (V.T @ rho @ V - 0.5 * (VVt @ rho + rho @ VVt))
    return out


def liouvillian_matrix(config: Config, eig: EigenSystem | None = None, channels=None) -> np.ndarray:
    """Real 64x64 generator over the Hermitian basis (row-major vec internally)."""
    if eig is None:
        eig = analytic_eigensystem(config.params)
    if channels is None:
        channels = build_channels(config.params, eig)
    H = build_hamiltonian(config.params)
    ident = np.eye(8)
    L = (-1j * (np.kron(H, ident) - np.kron(ident, H))).astype(complex)
    for ch in channels:
        jm, jp = _channel_weights(ch, config)
        if jm == 0.0 and jp == 0.0:
            continue
        V = ch.operator_product_basis(eig)
        VtV = V.T @ V
        VVt = V @ V.T
        L += jm * (np.kron(V, V) - 0.5 * (np.kron(VtV, ident) + np.kron(ident, VtV)))
        L += jp * (np.kron(V.T, V.T) - 0.5 * (np.kron(VVt, ident) + np.kron(ident, VVt)))
    basis = hermitian_basis()
    T = basis.reshape(64, 64).T
    L_herm = T.conj().T @ L @ T
    imag_max = float(np.abs(L_herm.imag).max())
    scale = max(float(np.abs(L_herm.real).max()), 1.0)
    if imag_max > 1e-12 * scale:  # pragma: no cover - structural guarantee
        raise AssertionError(f"Hermitian-basis generator not real: imag {imag_max:.3e}")
    return L_herm.real


def matrix_to_coords(rho: np.ndarray) -> np.ndarray:
    basis = hermitian_basis()
    return np.einsum("kij,ij->k", basis.conj(), rho).real


def coords_to_matrix(x: np.ndarray) -> np.ndarray:
    basis = hermitian_basis()
    return np.tensordot(x, basis, axes=(0, 0))


@dataclass(frozen=True)
class LiouvillianSolution:
    """Steady state of the full generator plus its consistency diagnostics."""

    populations: np.ndarray
    currents: np.ndarray
    coherence_max: float
    rho: np.ndarray
    min_eigenvalue: float


def liouvillian_oracle(config: Config) -> LiouvillianSolution:
    """Null vector of the 64x64 generator: populations, currents, coherences.

    Currents are computed directly as Tr(H * dissipator_mu[rho]); steady
    coherences in the eigenbasis are returned for the vanishing check.
    """
    eig = analytic_eigensystem(config.params)
    channels = build_channels(config.params, eig)
    L = liouvillian_matrix(config, eig, channels)
    svals = np.linalg.svd(L, compute_uv=False)
    scale = max(float(svals[0]), 1e-300)
    if svals[-1] > 1e-8 * scale:  # pragma: no cover - structural guarantee
        raise SingularSteadyState("generator has no null vector; construction is broken")
    if svals[-2] < NULLITY_GAP * scale:
        raise SingularSteadyState("generator null space has dimension > 1")
    _u, _s, vt = np.linalg.svd(L)
    rho = coords_to_matrix(vt[-1])
    rho = rho / np.trace(rho).real
    rho = 0.5 * (rho + rho.conj().T)
    H = build_hamiltonian(config.params)
    currents = np.array([
        float(np.real(np.trace(H @ bath_dissipator_apply(config, eig, channels, lab, rho))))
        for lab in BATH_LABELS
    ])
    rho_eig = eig.U.T @ rho @ eig.U
    populations = np.real(np.diag(rho_eig)).copy()
    coherence_max = float(np.abs(rho_eig - np.diag(np.diag(rho_eig))).max())
    min_eigenvalue = float(np.linalg.eigvalsh(rho).min())
    return LiouvillianSolution(
        populations=populations,
        currents=currents,
        coherence_max=coherence_max,
        rho=rho,
        min_eigenvalue=min_eigenvalue,
    )


def gibbs_product_state(eig: EigenSystem, temperature: float) -> np.ndarray:
    """Thermal state of the device Hamiltonian, in the product basis."""
    p = eig.gibbs_populations(temperature)
    return eig.U @ np.diag(p) @ eig.U.T


@dataclass(frozen=True)
class RelaxationResult:
    populations: np.ndarray
    rho: np.ndarray
    t_end: float
    residual: float
    trace_drift: float
    doublings: int


def relaxation_oracle(
    config: Config,
    t_max: float | None = None,
    initial: np.ndarray | None = None,
    residual_tol: float = RELAX_RESIDUAL,
) -> RelaxationResult:
    """Propagate rho(t) = exp(L t) rho(0) with step doubling until the flow stops.

    The exact linear propagator sidesteps the stiffness of the generator
    (oscillation frequencies ~ omega_R against relaxation rates ~ gamma);
    it depends only on the generator, never on its null space, so the
    endpoint is an independent check of the steady-state solvers. The time
    cap defaults to 1e3 / min attached gamma.
    """
    eig = analytic_eigensystem(config.params)
    attached = [b.gamma for b in config.baths if b.attached]
    if not attached:
        raise SingularSteadyState("all baths detached: nothing to relax towards")
    cap = t_max if t_max is not None else 1e3 / min(attached)
    if initial is None:
        initial = gibbs_product_state(eig, config.bath("L").temperature)
    L = liouvillian_matrix(config)
    x = matrix_to_coords(np.asarray(initial, dtype=complex))
    trace_drift = abs(float(x[:8].sum()) - 1.0)

    def residual_of(vec: np.ndarray) -> float:
        return float(np.abs(L @ vec).max())

    # The trace functional is tau . x with tau = 1 on the eight diagonal
    # coordinates; tau is a left null vector of L, so exp(L t) preserves it.
    # Re-impose that affine invariant on the propagator after each squaring
    # (a manifold projection), otherwise round-off accumulates a visible
    # trace drift over ~30 squarings.
    tau = np.zeros(64)
    tau[:8] = 1.0

    def project_trace(prop: np.ndarray) -> np.ndarray:
        defect = tau - prop.T @ tau
        return prop + np.outer(tau / 8.0, defect)

    res = residual_of(x)
    t = 0.0
    doublings = 0
    if res >= residual_tol:
        norm = max(float(np.abs(L).max()), 1e-300)
        t = min(0.05 / norm, cap)
        prop = project_trace(expm(L * t))
        x0 = x
        while True:
            x = prop @ x0
            trace_drift = max(trace_drift, abs(float(x[:8].sum()) - 1.0))
            res = residual_of(x)
            if res < residual_tol:
                break
            if t >= cap:
                raise NoConvergence(
                    f"relaxation residual {res:.3e} at the time cap t={t:.3e} "
                    f"(target {residual_tol:.0e})"
                )
            prop = project_trace(prop @ prop)
            t *= 2.0
            doublings += 1
    rho = coords_to_matrix(x)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    populations = np.real(np.diag(eig.U.T @ rho @ eig.U)).copy()
    return RelaxationResult(
        populations=populations,
        rho=rho,
        t_end=t,
        residual=res,
        trace_drift=trace_drift,
        doublings=doublings,
    )
