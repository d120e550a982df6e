"""Population rate matrices, steady-state solve and terminal heat currents.

Two lanes are kept deliberately:

* the reference operations below build the explicit per-bath generators
  M_mu and solve the null-space problem with full diagnostics, raising
  typed errors;
* :class:`BatchEvaluator` routes grids of points through the selected
  batch kernel (compiled or numpy) with the same semantics, reporting
  per-point status codes instead of raising.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import (
    STATUS_NEGATIVE,
    STATUS_OK,
    STATUS_SINGULAR,
    STATUS_UNSTABLE,
    solve_batch,
)
from .eigensystem import EigenSystem, TransitionChannel, analytic_eigensystem, build_channels
from .errors import (
    FirstLawViolation,
    NumericalInstability,
    SecondLawViolation,
    SingularSteadyState,
)
from .model import BATH_LABELS, BathSpec, Config, damping_rate, thermal_occupation

COND_LIMIT = 1e10
NEGATIVE_TOL = 1e-10
RESIDUAL_RTOL = 1e-10
NULLITY_TOL = 1e-12


@dataclass(frozen=True)
class RateMatrices:
    """Per-bath population generators and the per-channel rates behind them.

    Column sums of each M vanish identically (the diagonal is assembled as
    the exact negative of the off-diagonal column sums). B is the upward
    (absorption) rate, A the downward (emission) rate, per (bath, l).
    """

    M_L: np.ndarray
    M_M: np.ndarray
    M_R: np.ndarray
    A: dict[tuple[str, int], float]
    B: dict[tuple[str, int], float]
    baths: tuple[BathSpec, BathSpec, BathSpec]

    def matrix(self, label: str) -> np.ndarray:
        return {"L": self.M_L, "M": self.M_M, "R": self.M_R}[label]

    @property
    def total(self) -> np.ndarray:
        return self.M_L + self.M_M + self.M_R


@dataclass(frozen=True)
class SteadyState:
    """Populations in the eigenbasis; coherences vanish and are not stored."""

    populations: np.ndarray
    residual: float
    clipped: bool
    cond: float


@dataclass(frozen=True)
class HeatCurrents:
    """Terminal heat currents, positive when the system absorbs from the bath."""

    Q_L: float
    Q_M: float
    Q_R: float

    def as_dict(self) -> dict[str, float]:
        return {"L": self.Q_L, "M": self.Q_M, "R": self.Q_R}

    def as_array(self) -> np.ndarray:
        return np.array([self.Q_L, self.Q_M, self.Q_R])


def channel_rates(channel: TransitionChannel, bath: BathSpec) -> tuple[float, float]:
    """(B, A): absorption and emission rates of one channel.

    At T = 0 the emission form gamma(w) * (n+1) * sin^2(alpha) is used
    directly, never exp(w/T) * B, which would be 0 * inf.
    """
    if bath.gamma == 0.0:
        return 0.0, 0.0
    gw = damping_rate(bath, channel.frequency)
    occ = thermal_occupation(channel.frequency, bath.temperature)
    a2 = channel.amplitude * channel.amplitude
    return gw * occ * a2, gw * (occ + 1.0) * a2


def build_rate_matrices(channels, baths) -> RateMatrices:
    """Assemble M_L, M_M, M_R from the channels and bath parameters."""
    config_baths = _ordered_baths(baths)
    by_label = {b.label: b for b in config_baths}
    M = {lab: np.zeros((8, 8)) for lab in BATH_LABELS}
    A: dict[tuple[str, int], float] = {}
    B: dict[tuple[str, int], float] = {}
    for ch in channels:
        up, down = channel_rates(ch, by_label[ch.bath])
        B[(ch.bath, ch.index)] = up
        A[(ch.bath, ch.index)] = down
        m = M[ch.bath]
        for upper, lower, _sign in ch.pairs:
            u, d = upper - 1, lower - 1
            m[u, d] += up
            m[d, u] += down
    for m in M.values():
        np.fill_diagonal(m, 0.0)
        col = m.sum(axis=0)
        np.fill_diagonal(m, -col)
    return RateMatrices(M_L=M["L"], M_M=M["M"], M_R=M["R"], A=A, B=B, baths=config_baths)


def _ordered_baths(baths) -> tuple[BathSpec, BathSpec, BathSpec]:
    if isinstance(baths, Config):
        return baths.baths
    if hasattr(baths, "values"):
        baths = list(baths.values())
    baths = list(baths)
    return tuple(next(b for b in baths if b.label == lab) for lab in BATH_LABELS)


def finalize_populations(p: np.ndarray, tol: float = NEGATIVE_TOL) -> tuple[np.ndarray, bool]:
    """Clip round-off negatives (within -tol) to zero and renormalize.

    Anything more negative is a genuine solver failure, not round-off.
    """
    worst = float(p.min())
    if worst < -tol:
        raise NumericalInstability(
            f"steady-state populations reached {worst:.3e}, below the -{tol} tolerance"
        )
    clipped = bool((p < 0.0).any())
    p = np.clip(p, 0.0, None)
    return p / p.sum(), clipped


def solve_steady(rates: RateMatrices) -> SteadyState:
    """Null-space populations of K = M_L + M_M + M_R, normalized to trace 1.

    One row of K is replaced by the normalization row of ones (exact
    because the all-ones vector spans K's left null space); nullity > 1 or
    a condition estimate past COND_LIMIT raises instead of guessing.
    """
    K = rates.total
    maxrate = float(np.abs(K).max())
    if maxrate == 0.0:
        raise SingularSteadyState("all baths detached: no dynamics, null space is everything")
    svals = np.linalg.svd(K / maxrate, compute_uv=False)
    nullity = int(np.sum(svals < NULLITY_TOL * max(svals[0], 1.0)))
    if nullity > 1:
        raise SingularSteadyState(
            f"rate generator null space has dimension {nullity}; "
            "steady state is not unique"
        )
    A = K / maxrate
    A[7, :] = 1.0
    rhs = np.zeros(8)
    rhs[7] = 1.0
    cond = float(np.linalg.cond(A))
    if cond > COND_LIMIT:
        raise NumericalInstability(
            f"steady-state system condition ~{cond:.2e} leaves fewer than six trusted digits"
        )
    p = np.linalg.solve(A, rhs)
    p, clipped = finalize_populations(p)
    residual = float(np.abs(K @ p).max())
    if residual > RESIDUAL_RTOL * maxrate:
        raise NumericalInstability(
            f"steady-state residual {residual:.3e} exceeds {RESIDUAL_RTOL:.0e} * max rate"
        )
    return SteadyState(populations=p, residual=residual, clipped=clipped, cond=cond)


def first_law_tolerance(q: np.ndarray, maxrate: float, lam_scale: float) -> float:
    """|sum Q| must stay below this: relative bound plus an honest round-off floor.

    The floor 64*eps*maxrate*|lam| covers the cancellation error of the
    current reduction itself; without it an exact-equilibrium point (all
    currents ~1e-20) would fail the relative test spuriously.
    """
    eps = np.finfo(float).eps
    return max(1e-12 * float(np.abs(q).max()), 64.0 * eps * maxrate * lam_scale)


def heat_currents(rates: RateMatrices, state: SteadyState, eig: EigenSystem) -> HeatCurrents:
    """Q_mu = <lam| M_mu |p>, with the two thermodynamic laws asserted."""
    p = state.populations
    q = np.array([float(eig.lam @ (rates.matrix(lab) @ p)) for lab in BATH_LABELS])
    maxrate = float(np.abs(rates.total).max()) if np.abs(rates.total).max() > 0 else 0.0
    tol = first_law_tolerance(q, maxrate, float(np.abs(eig.lam).max()))
    if abs(q.sum()) > tol:
        raise FirstLawViolation(f"currents sum to {q.sum():.3e}, tolerance {tol:.3e}")
    sigma = 0.0
    for lab, qi in zip(BATH_LABELS, q):
        bath = next(b for b in rates.baths if b.label == lab)
        if bath.attached and bath.temperature > 0.0:
            sigma -= qi / bath.temperature
    if sigma < -1e-12:
        raise SecondLawViolation(f"entropy production {sigma:.3e} < -1e-12")
    return HeatCurrents(Q_L=q[0], Q_M=q[1], Q_R=q[2])


def steady_point(config: Config):
    """Full reference pipeline for one configuration.

    Returns (eig, channels, rates, state, currents).
    """
    eig = analytic_eigensystem(config.params)
    channels = build_channels(config.params, eig)
    rates = build_rate_matrices(channels, config)
    state = solve_steady(rates)
    currents = heat_currents(rates, state, eig)
    return eig, channels, rates, state, currents


class BatchEvaluator:
    """Grid-point solver on top of the selected batch kernel.

    Channel data is frozen once per device; each solve() call takes
    per-point bath parameter arrays (temperature, gamma, ohmic flags) in
    bath order L, M, R.
    """

    def __init__(self, params, eig: EigenSystem | None = None):
        self.params = params
        self.eig = eig if eig is not None else analytic_eigensystem(params)
        self.channels = build_channels(params, self.eig)
        self.lam = np.ascontiguousarray(self.eig.lam)
        self.ch_bath = np.array([BATH_LABELS.index(ch.bath) for ch in self.channels], dtype=np.int32)
        self.ch_freq = np.array([ch.frequency for ch in self.channels])
        self.ch_a2 = np.array([ch.amplitude**2 for ch in self.channels])
        self.ch_pairs = np.array(
            [[(u - 1, d - 1) for (u, d, _s) in ch.pairs] for ch in self.channels],
            dtype=np.int32,
        )

    def solve(self, temperature, gamma, ohmic):
        """(populations, currents, residual, cond, status) for N points."""
        return solve_batch(
            self.lam, self.ch_bath, self.ch_freq, self.ch_a2, self.ch_pairs,
            temperature, gamma, ohmic,
        )

    def solve_temperatures(self, config: Config, temperatures) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Currents over an (N, 3) temperature grid with config's gammas/spectra.

        Returns (populations, currents, status).
        """
        temps = np.atleast_2d(np.asarray(temperatures, dtype=float))
        n = temps.shape[0]
        gam = np.tile([b.gamma for b in config.baths], (n, 1))
        ohm = np.tile([b.spectrum.value == "ohmic" for b in config.baths], (n, 1))
        pops, currents, _res, _cond, status = self.solve(temps, gam, ohm)
        return pops, currents, status


def bath_arrays(config: Config) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(1, 3) temperature/gamma/ohmic arrays for a single configuration."""
    t = np.array([[b.temperature for b in config.baths]])
    g = np.array([[b.gamma for b in config.baths]])
    o = np.array([[b.spectrum.value == "ohmic" for b in config.baths]])
    return t, g, o
