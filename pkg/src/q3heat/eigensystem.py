"""Analytic eigen-decomposition of the coupled three-qubit Hamiltonian.

The Hamiltonian splits into four 2x2 blocks in the product basis, giving
closed forms for the eight levels, four mixing angles, eigenvectors and
the twelve dissipation channels (one per bath and Bohr frequency). A dense
numeric diagonalization is kept alongside purely as a validation oracle.

Basis convention: product states ordered |111>, |110>, ..., |000> (binary
descending, qubit order L, M, R) with |1> = [1, 0]^T the excited state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ChannelInconsistency, ConvergenceFailure
from .model import BATH_LABELS, SECULAR_THRESHOLD, Config, DeviceParams, SecularReport, damping_rate

_SX = np.array([[0.0, 1.0], [1.0, 0.0]])
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]])
_I2 = np.eye(2)

PRODUCT_LABELS = ("111", "110", "101", "100", "011", "010", "001", "000")

#: Frequency tolerance (relative to omega_R) for channel consistency checks.
FREQ_TOL = 1e-12


def _kron3(a, b, c):
    return np.kron(np.kron(a, b), c)


def coupling_operator(label: str) -> np.ndarray:
    """sigma_x acting on one qubit, as an 8x8 product-basis matrix."""
    ops = {"L": _kron3(_SX, _I2, _I2), "M": _kron3(_I2, _SX, _I2), "R": _kron3(_I2, _I2, _SX)}
    return ops[label]


def build_hamiltonian(params: DeviceParams) -> np.ndarray:
    """H = sum_mu (omega_mu/2) sigma_z^mu + g sigma_x^L sigma_x^M sigma_x^R."""
    H = 0.5 * params.omega_L * _kron3(_SZ, _I2, _I2)
    H += 0.5 * params.omega_M * _kron3(_I2, _SZ, _I2)
    H += 0.5 * params.omega_R * _kron3(_I2, _I2, _SZ)
    H += params.g * _kron3(_SX, _SX, _SX)
    return H


@dataclass(frozen=True)
class EigenSystem:
    """Closed-form spectrum of the device.

    Lambda: the block detunings [omega_R, omega_L, omega_M, 0].
    lam:    eight eigenvalues in ascending index order (lam[k] = lambda_{k+1}).
    theta:  four mixing angles, one per 2x2 block.
    U:      orthogonal 8x8 matrix; column k holds level k+1 in the product basis.
    """

    Lambda: np.ndarray
    lam: np.ndarray
    theta: np.ndarray
    U: np.ndarray

    def gibbs_populations(self, temperature: float) -> np.ndarray:
        """Equilibrium populations exp(-lam/T)/Z; ground state at T = 0."""
        if temperature == 0.0:
            p = np.zeros(8)
            p[0] = 1.0
            return p
        w = np.exp(-(self.lam - self.lam[0]) / temperature)
        return w / w.sum()


def analytic_eigensystem(params: DeviceParams) -> EigenSystem:
    """Eigenvalues, mixing angles and eigenvectors from the 2x2-block closed forms."""
    g = params.g
    Lambda = np.array([params.omega_R, params.omega_L, params.omega_M, 0.0])
    root = np.sqrt(Lambda**2 + g * g)
    lam = np.empty(8)
    lam[:4] = -root
    lam[4:] = root[::-1]
    sin_t = g / np.sqrt((root + Lambda) ** 2 + g * g)
    cos_t = np.sqrt(1.0 - sin_t**2)
    theta = np.arcsin(sin_t)

    # Columns follow the block structure: each level mixes one excited-like
    # and one ground-like product state; see PRODUCT_LABELS for the ordering.
    s, c = sin_t, cos_t
    U = np.zeros((8, 8))
    U[0, 0], U[7, 0] = -s[0], c[0]   # level 1: |111>, |000>
    U[2, 1], U[5, 1] = -s[1], c[1]   # level 2: |101>, |010>
    U[3, 2], U[4, 2] = -c[2], s[2]   # level 3: |100>, |011>
    U[1, 3], U[6, 3] = -c[3], s[3]   # level 4: |110>, |001>
    U[1, 4], U[6, 4] = s[3], c[3]    # level 5
    U[3, 5], U[4, 5] = s[2], c[2]    # level 6
    U[2, 6], U[5, 6] = c[1], s[1]    # level 7
    U[0, 7], U[7, 7] = c[0], s[0]    # level 8
    return EigenSystem(Lambda=Lambda, lam=lam, theta=theta, U=U)


def alpha_angles(theta: np.ndarray) -> dict[tuple[str, int], float]:
    """Dissipation angles alpha_{mu,k}; sin(alpha) is the channel amplitude.

    The closed forms are fixed by requiring that the twelve channels
    reconstruct each bare coupling operator sigma_x^mu exactly in the
    eigenbasis (the decomposition-completeness identity), which pins both
    the angle pairings and the signs.
    """
    t1, t2, t3, t4 = (float(x) for x in theta)
    quarter = math.pi / 4.0
    out: dict[tuple[str, int], float] = {}
    for k in (1, 2, 3, 4):
        br = (k + 1) // 2  # ceil(k/2)
        sign = -1.0 if k % 2 else 1.0
        dL = (t1 - t3) if br == 1 else (t2 - t4)
        dM = (t1 - t2) if br == 1 else (t3 - t4)
        sR = (t1 + t4) if br == 1 else (t2 + t3)
        out[("L", k)] = quarter - sign * (quarter + dL)
        out[("M", k)] = quarter - sign * (quarter - dM)
        out[("R", k)] = quarter + sign * (quarter - sR)
    return out


def bohr_frequencies(params: DeviceParams) -> dict[tuple[str, int], float]:
    """The twelve channel frequencies omega_{mu,l}, all positive."""
    g = params.g
    r = np.sqrt(np.array([params.omega_R, params.omega_L, params.omega_M, 0.0]) ** 2 + g * g)
    return {
        ("L", 1): r[0] - r[2], ("L", 2): r[0] + r[2],
        ("L", 3): r[1] - r[3], ("L", 4): r[1] + r[3],
        ("M", 1): r[0] - r[1], ("M", 2): r[0] + r[1],
        ("M", 3): r[2] - r[3], ("M", 4): r[2] + r[3],
        ("R", 1): r[0] - r[3], ("R", 2): r[0] + r[3],
        ("R", 3): r[1] - r[2], ("R", 4): r[1] + r[2],
    }


#: Level pairs (upper, lower, sign) per channel, 1-based level indices.
#: Each channel lowers the system by its Bohr frequency across two pairs.
CHANNEL_PAIRS: dict[tuple[str, int], tuple[tuple[int, int, int], ...]] = {
    ("L", 1): ((3, 1, -1), (8, 6, +1)),
    ("L", 2): ((6, 1, +1), (8, 3, +1)),
    ("L", 3): ((4, 2, -1), (7, 5, +1)),
    ("L", 4): ((5, 2, +1), (7, 4, +1)),
    ("M", 1): ((2, 1, +1), (8, 7, +1)),
    ("M", 2): ((8, 2, +1), (7, 1, -1)),
    ("M", 3): ((4, 3, +1), (6, 5, +1)),
    ("M", 4): ((5, 3, +1), (6, 4, -1)),
    ("R", 1): ((8, 5, +1), (4, 1, +1)),
    ("R", 2): ((5, 1, +1), (8, 4, -1)),
    ("R", 3): ((7, 6, +1), (3, 2, +1)),
    ("R", 4): ((6, 2, +1), (7, 3, -1)),
}


@dataclass(frozen=True)
class TransitionChannel:
    """One (bath, Bohr frequency) dissipation channel.

    amplitude is the signed matrix element sin(alpha); pairs hold the two
    (upper, lower, sign) level pairs the channel connects.
    """

    bath: str
    index: int
    amplitude: float
    frequency: float
    pairs: tuple[tuple[int, int, int], ...]

    def operator_eigenbasis(self) -> np.ndarray:
        """Lowering operator sum sign * amplitude |lower><upper| as an 8x8 matrix."""
        V = np.zeros((8, 8))
        for upper, lower, sign in self.pairs:
            V[lower - 1, upper - 1] += sign * self.amplitude
        return V

    def operator_product_basis(self, eig: EigenSystem) -> np.ndarray:
        return eig.U @ self.operator_eigenbasis() @ eig.U.T


def build_channels(params: DeviceParams, eig: EigenSystem | None = None) -> tuple[TransitionChannel, ...]:
    """All twelve channels, consistency-checked against the level spacings."""
    if eig is None:
        eig = analytic_eigensystem(params)
    freqs = bohr_frequencies(params)
    alphas = alpha_angles(eig.theta)
    tol = FREQ_TOL * params.omega_R
    channels = []
    for (bath, l), pairs in CHANNEL_PAIRS.items():
        w = freqs[(bath, l)]
        for upper, lower, _sign in pairs:
            spacing = eig.lam[upper - 1] - eig.lam[lower - 1]
            if abs(spacing - w) > tol:
                raise ChannelInconsistency(
                    f"channel {bath}{l}: pair {upper}->{lower} spacing {spacing!r} "
                    f"!= frequency {w!r}"
                )
        channels.append(
            TransitionChannel(
                bath=bath,
                index=l,
                amplitude=math.sin(alphas[(bath, l)]),
                frequency=w,
                pairs=pairs,
            )
        )
    channels.sort(key=lambda ch: (BATH_LABELS.index(ch.bath), ch.index))
    return tuple(channels)


def numeric_diagonalization_oracle(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Dense symmetric eigensolve, ascending; validation-only code path."""
    H = np.asarray(H, dtype=float)
    if H.shape != (8, 8) and H.shape[0] != H.shape[1]:
        raise ValueError(f"need a square matrix, got shape {H.shape}")
    if not np.allclose(H, H.T, atol=1e-12 * max(1.0, float(np.abs(H).max()))):
        raise ValueError("matrix is not symmetric")
    try:
        vals, vecs = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - unreachable for 8x8
        raise ConvergenceFailure(str(exc)) from exc
    return vals, vecs


def secular_report(config: Config, channels: tuple[TransitionChannel, ...] | None = None) -> SecularReport:
    """Compare the largest damping rate with the smallest within-bath Bohr gap.

    Only attached baths contribute; a detached bath has no dissipator to
    secularize. With no attached bath the report is trivially valid.
    """
    if channels is None:
        channels = build_channels(config.params)
    min_gap = math.inf
    max_gamma = 0.0
    for bath in config.baths:
        if not bath.attached:
            continue
        ws = [ch.frequency for ch in channels if ch.bath == bath.label]
        for i in range(len(ws)):
            max_gamma = max(max_gamma, damping_rate(bath, ws[i]))
            for j in range(i + 1, len(ws)):
                min_gap = min(min_gap, abs(ws[i] - ws[j]))
    if max_gamma == 0.0:
        return SecularReport(min_gap=min_gap, max_gamma=0.0, ratio=0.0, valid=True)
    ratio = max_gamma / min_gap if min_gap > 0.0 else math.inf
    return SecularReport(min_gap=min_gap, max_gamma=max_gamma, ratio=ratio, valid=ratio < SECULAR_THRESHOLD)
