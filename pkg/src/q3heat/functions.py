"""The six thermodynamic device functions quantified from steady-state sweeps.

Amplification, valve crossings, rectification, stabilizer sensitivity and
the switch threshold are all pure orchestrations of steady-state solves;
the flatness and threshold metrics are declared conventions of this
package (documented per function), not physics identities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import STATUS_NEGATIVE, STATUS_OK, STATUS_SINGULAR, STATUS_UNSTABLE
from .errors import (
    BothCurrentsZero,
    DegenerateDenominator,
    NumericalInstability,
    OrderingViolation,
    SingularSteadyState,
)
from .model import BATH_LABELS, Config
from .steady import BatchEvaluator

#: |dQ_M| below this (omega_R^2 units) means the point is a switch-off
#: plateau, not an amplifier operating point.
DENOMINATOR_FLOOR = 1e-18
#: Central-difference step for temperature derivatives, in omega_R units.
DERIVATIVE_STEP = 1e-4
#: Relative disagreement between the h and h/2 estimates that flags a point.
RICHARDSON_TOL = 1e-2

VALVE_BRACKET = 1e-6
VALVE_CURRENT_TOL = 1e-10


def _solve_currents(ev: BatchEvaluator, config: Config, temps: np.ndarray) -> np.ndarray:
    """Currents over an (N, 3) temperature grid, raising on bad statuses."""
    _pops, currents, status = ev.solve_temperatures(config, temps)
    if (status == STATUS_SINGULAR).any():
        raise SingularSteadyState("steady state not unique at a requested point")
    if (status == STATUS_NEGATIVE).any():
        raise NumericalInstability("populations negative beyond tolerance at a requested point")
    return currents


def _base_temps(config: Config) -> np.ndarray:
    return np.array([b.temperature for b in config.baths])


@dataclass(frozen=True)
class AmplificationResult:
    """Transistor gains at one operating point.

    alpha_L + alpha_R = -1 wherever the denominator is healthy (first law
    differentiated along the control path).
    """

    alpha_L: float
    alpha_R: float
    dQ_M_dT: float
    step: float
    richardson_mismatch: float
    flagged: bool


def amplification(config: Config, step: float = DERIVATIVE_STEP,
                  evaluator: BatchEvaluator | None = None) -> AmplificationResult:
    """Gains d(Q_L,R)/dQ_M as ratios of central differences in T_M.

    Uses steps h and h/2; the refined estimate is returned and a >1%
    disagreement between the two flags the point as unresolved.
    """
    ev = evaluator if evaluator is not None else BatchEvaluator(config.params)
    w_r = config.params.omega_R
    t_m = config.bath("M").temperature
    h = min(step * w_r, t_m / 2.0)
    if h <= 0.0:
        raise DegenerateDenominator("control temperature sits at the domain edge; no two-sided step")
    base = _base_temps(config)
    temps = np.tile(base, (4, 1))
    temps[0, 1] = t_m + h
    temps[1, 1] = t_m - h
    temps[2, 1] = t_m + h / 2.0
    temps[3, 1] = t_m - h / 2.0
    q = _solve_currents(ev, config, temps)

    def gains(iplus: int, iminus: int) -> tuple[float, float, float]:
        d_m = q[iplus, 1] - q[iminus, 1]
        if abs(d_m) < DENOMINATOR_FLOOR * w_r * w_r:
            raise DegenerateDenominator(
                f"|dQ_M| = {abs(d_m):.3e} below floor; switch-off plateau, not an amplifier point"
            )
        return (q[iplus, 0] - q[iminus, 0]) / d_m, (q[iplus, 2] - q[iminus, 2]) / d_m, d_m

    a_l_h, a_r_h, _ = gains(0, 1)
    a_l, a_r, d_m = gains(2, 3)
    mismatch = max(
        abs(a_l - a_l_h) / max(abs(a_l), 1e-6),
        abs(a_r - a_r_h) / max(abs(a_r), 1e-6),
    )
    return AmplificationResult(
        alpha_L=a_l,
        alpha_R=a_r,
        dQ_M_dT=d_m / h,
        step=h / 2.0,
        richardson_mismatch=mismatch,
        flagged=mismatch > RICHARDSON_TOL,
    )


@dataclass(frozen=True)
class Crossing:
    """One zero of a terminal current along the control-temperature scan."""

    terminal: str
    temperature: float
    bracket: float
    t_below: float
    q_below: float
    t_above: float
    q_above: float


@dataclass(frozen=True)
class ValveReport:
    crossings: tuple[Crossing, ...]
    grid: np.ndarray
    currents: np.ndarray  # (N, 3)

    def for_terminal(self, terminal: str) -> tuple[Crossing, ...]:
        return tuple(c for c in self.crossings if c.terminal == terminal)


def valve_crossings(config: Config, t_range: tuple[float, float] = (0.005, 0.8),
                    grid: int = 400, evaluator: BatchEvaluator | None = None) -> ValveReport:
    """Scan Q_mu(T_M) and bisect every sign change per terminal.

    Brackets are refined until both the bracket width (<= 1e-6 omega_R)
    and the terminal current at the crossing (<= 1e-10 omega_R^2) are
    resolved; an empty crossing list is a valid result.
    """
    ev = evaluator if evaluator is not None else BatchEvaluator(config.params)
    lo, hi = t_range
    if not (0.0 <= lo < hi):
        raise OrderingViolation(f"valve scan range must satisfy 0 <= lo < hi, got {t_range}")
    ts = np.linspace(lo, hi, grid)
    base = _base_temps(config)
    temps = np.tile(base, (grid, 1))
    temps[:, 1] = ts
    q = _solve_currents(ev, config, temps)
    w_r = config.params.omega_R

    def current_at(t_m: float, col: int) -> float:
        point = base.copy()
        point[1] = t_m
        return float(_solve_currents(ev, config, point[None, :])[0, col])

    crossings = []
    for col, terminal in enumerate(BATH_LABELS):
        v = q[:, col]
        for i in range(grid - 1):
            if v[i] == 0.0 and i > 0:
                crossings.append(Crossing(terminal, float(ts[i]), 0.0,
                                          float(ts[i - 1]), float(v[i - 1]),
                                          float(ts[i + 1]), float(v[i + 1])))
                continue
            if v[i] * v[i + 1] >= 0.0:
                continue
            a, b = float(ts[i]), float(ts[i + 1])
            fa, fb = float(v[i]), float(v[i + 1])
            mid, fm = 0.5 * (a + b), None
            for _ in range(200):
                mid = 0.5 * (a + b)
                fm = current_at(mid, col)
                if fa * fm <= 0.0:
                    b, fb = mid, fm
                else:
                    a, fa = mid, fm
                if (b - a) <= VALVE_BRACKET * w_r and abs(fm) <= VALVE_CURRENT_TOL * w_r * w_r:
                    break
            crossings.append(Crossing(terminal, mid, b - a, a, fa, b, fb))
    return ValveReport(crossings=tuple(crossings), grid=ts, currents=q)


@dataclass(frozen=True)
class RectificationResult:
    """Directed currents and the rectification factor at one |Delta T|.

    R is bounded in [0, 1] in two-terminal mode (second law forces both
    directed currents nonnegative); with a third active bath the formula
    can exceed 1 once the forward and backward currents share a sign.
    """

    R: float
    Q_fore: float
    Q_back: float
    delta_T: float
    T_A: float
    mode: str


def rectification(config: Config, delta_T: float, T_A: float, mode: str = "two-terminal",
                  evaluator: BatchEvaluator | None = None) -> RectificationResult:
    """Evaluate Q_R for the (T_R, T_M) pair split T_A +- |dT|/2 and its swap."""
    if mode not in ("two-terminal", "three-terminal"):
        raise OrderingViolation(f"mode must be two-terminal or three-terminal, got {mode!r}")
    d = abs(delta_T)
    if T_A - d / 2.0 < 0.0:
        raise OrderingViolation(f"T_A - |delta_T|/2 = {T_A - d / 2.0} is negative")
    work = config
    if mode == "two-terminal":
        baths = tuple(
            type(b)(b.label, b.temperature, 0.0, b.spectrum) if b.label == "L" else b
            for b in config.baths
        )
        work = Config(config.params, baths)
    ev = evaluator if evaluator is not None else BatchEvaluator(work.params)
    base = _base_temps(work)
    temps = np.tile(base, (2, 1))
    temps[0, 1], temps[0, 2] = T_A - d / 2.0, T_A + d / 2.0   # forward: R hot
    temps[1, 1], temps[1, 2] = T_A + d / 2.0, T_A - d / 2.0   # backward: R cold
    q = _solve_currents(ev, work, temps)
    q_fore = float(q[0, 2])
    q_back = float(-q[1, 2])
    w_r = work.params.omega_R
    floor = DENOMINATOR_FLOOR * w_r * w_r
    if abs(q_fore) <= floor and abs(q_back) <= floor:
        raise BothCurrentsZero(
            f"|Q_fore| = {abs(q_fore):.3e} and |Q_back| = {abs(q_back):.3e}; R undefined"
        )
    denom = abs(q_fore + q_back)
    r = math.inf if denom == 0.0 else abs(q_fore - q_back) / denom
    return RectificationResult(R=r, Q_fore=q_fore, Q_back=q_back, delta_T=d, T_A=T_A, mode=mode)


@dataclass(frozen=True)
class CurrentSensitivity:
    minimum: float
    maximum: float
    span: float
    flatness: float
    peak_slope: float


@dataclass(frozen=True)
class StabilizerReport:
    terminal: str
    grid: np.ndarray
    currents: np.ndarray  # (N, 3)
    per_current: dict[str, CurrentSensitivity]


def stabilizer_sensitivity(config: Config, terminal: str = "L",
                           t_range: tuple[float, float] = (0.0, 0.8), grid: int = 161,
                           evaluator: BatchEvaluator | None = None) -> StabilizerReport:
    """Scan one bath temperature and report, per current, the span
    (max - min), the span relative to the current's own largest magnitude
    on the scan (flatness), and the peak finite-difference slope.

    A current that is identically constant (e.g. the scanned bath is
    detached) reports zero span and zero flatness.
    """
    if terminal not in BATH_LABELS:
        raise OrderingViolation(f"terminal must be one of {BATH_LABELS}, got {terminal!r}")
    ev = evaluator if evaluator is not None else BatchEvaluator(config.params)
    lo, hi = t_range
    if not (0.0 <= lo < hi):
        raise OrderingViolation(f"scan range must satisfy 0 <= lo < hi, got {t_range}")
    ts = np.linspace(lo, hi, grid)
    col = BATH_LABELS.index(terminal)
    base = _base_temps(config)
    temps = np.tile(base, (grid, 1))
    temps[:, col] = ts
    q = _solve_currents(ev, config, temps)
    per = {}
    for j, label in enumerate(BATH_LABELS):
        v = q[:, j]
        span = float(v.max() - v.min())
        scale = float(np.abs(v).max())
        flat = 0.0 if span == 0.0 else span / scale
        slope = float(np.abs(np.gradient(v, ts)).max())
        per[label] = CurrentSensitivity(
            minimum=float(v.min()), maximum=float(v.max()),
            span=span, flatness=flat, peak_slope=slope,
        )
    return StabilizerReport(terminal=terminal, grid=ts, currents=q, per_current=per)


@dataclass(frozen=True)
class SwitchReport:
    threshold: float
    epsilon: float
    grid: np.ndarray
    max_current: np.ndarray


def switch_threshold(config: Config, epsilon: float = 1e-9,
                     t_range: tuple[float, float] = (0.0, 0.5), grid: int = 200,
                     evaluator: BatchEvaluator | None = None) -> SwitchReport:
    """Largest scanned T_M below which both |Q_L| and |Q_R| stay <= epsilon.

    Grid convention: the threshold is the last grid point of the maximal
    all-quiet prefix of the ascending scan, 0 if the very first point is
    already loud.
    """
    if epsilon <= 0.0:
        return SwitchReport(threshold=0.0, epsilon=epsilon,
                            grid=np.linspace(*t_range, grid), max_current=np.array([]))
    ev = evaluator if evaluator is not None else BatchEvaluator(config.params)
    ts = np.linspace(*t_range, grid)
    base = _base_temps(config)
    temps = np.tile(base, (grid, 1))
    temps[:, 1] = ts
    q = _solve_currents(ev, config, temps)
    loud = np.maximum(np.abs(q[:, 0]), np.abs(q[:, 2]))
    quiet = loud <= epsilon
    if not quiet[0]:
        threshold = 0.0
    else:
        stop = int(np.argmin(quiet)) if not quiet.all() else grid
        threshold = float(ts[stop - 1])
    return SwitchReport(threshold=threshold, epsilon=epsilon, grid=ts, max_current=loud)
