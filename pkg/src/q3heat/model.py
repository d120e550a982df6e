"""Device and bath definitions plus the shared thermal functions.

Units: hbar = k_B = 1. omega_R is the canonical energy scale (default 1);
temperatures are energies and heat currents carry units omega_R**2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import (
    DegenerateQubits,
    NonPositiveFrequency,
    OrderingViolation,
    ResonanceViolation,
)

#: Relative tolerance on the resonance condition omega_L + omega_M = omega_R.
RESONANCE_RTOL = 1e-12
#: Two qubit frequencies closer than this (relative to omega_R) are degenerate.
DEGENERACY_RTOL = 1e-9
#: Secular validity convention: gamma_max / min Bohr gap below this is "valid".
SECULAR_THRESHOLD = 0.1

BATH_LABELS = ("L", "M", "R")


class Spectrum(str, Enum):
    """Bath spectral model: frequency-independent or linear-in-frequency damping."""

    FLAT = "flat"
    OHMIC = "ohmic"


@dataclass(frozen=True)
class DeviceParams:
    """Three qubit transition frequencies and the trilinear coupling strength.

    The resonance omega_L + omega_M = omega_R is enforced on construction;
    use :meth:`resonant` to derive omega_M exactly and avoid drift.
    """

    omega_L: float
    omega_M: float
    omega_R: float
    g: float

    def __post_init__(self):
        wl, wm, wr, g = self.omega_L, self.omega_M, self.omega_R, self.g
        for name, v in (("omega_L", wl), ("omega_M", wm), ("omega_R", wr), ("g", g)):
            if not math.isfinite(v):
                raise OrderingViolation(f"{name} must be finite, got {v!r}")
        if wl <= 0.0 or wm <= 0.0 or wr <= 0.0:
            raise OrderingViolation(
                f"frequencies must be positive, got omega_L={wl}, omega_M={wm}, omega_R={wr}"
            )
        if g <= 0.0:
            raise OrderingViolation(f"coupling g must be positive, got {g}")
        if abs(wl + wm - wr) > RESONANCE_RTOL * wr:
            raise ResonanceViolation(
                f"omega_L + omega_M = {wl + wm!r} deviates from omega_R = {wr!r} "
                f"beyond relative tolerance {RESONANCE_RTOL}"
            )
        gaps = (abs(wl - wm), abs(wr - wl), abs(wr - wm))
        if min(gaps) < DEGENERACY_RTOL * wr:
            raise DegenerateQubits(
                f"qubit frequencies too close (min gap {min(gaps):.3e}); "
                "degenerate levels break the secular master equation"
            )
        if not (wr > wl > wm):
            raise OrderingViolation(
                f"need omega_R > omega_L > omega_M, got "
                f"omega_R={wr}, omega_L={wl}, omega_M={wm}"
            )

    @classmethod
    def resonant(cls, omega_L: float, g: float, omega_R: float = 1.0) -> "DeviceParams":
        """Build params with omega_M = omega_R - omega_L derived exactly."""
        return cls(omega_L=omega_L, omega_M=omega_R - omega_L, omega_R=omega_R, g=g)


@dataclass(frozen=True)
class BathSpec:
    """One thermal terminal: temperature, base damping rate, spectrum kind.

    gamma = 0 detaches the bath (used for the two-terminal rectifier);
    temperature = 0 is legal and gives exactly zero occupation.
    """

    label: str
    temperature: float
    gamma: float
    spectrum: Spectrum = Spectrum.FLAT

    def __post_init__(self):
        if self.label not in BATH_LABELS:
            raise OrderingViolation(f"bath label must be one of {BATH_LABELS}, got {self.label!r}")
        if not (math.isfinite(self.temperature) and self.temperature >= 0.0):
            raise OrderingViolation(f"bath {self.label}: temperature must be >= 0, got {self.temperature!r}")
        if not (math.isfinite(self.gamma) and self.gamma >= 0.0):
            raise OrderingViolation(f"bath {self.label}: gamma must be >= 0, got {self.gamma!r}")
        if not isinstance(self.spectrum, Spectrum):
            object.__setattr__(self, "spectrum", Spectrum(self.spectrum))

    @property
    def attached(self) -> bool:
        return self.gamma > 0.0


@dataclass(frozen=True)
class Config:
    """A validated device plus its three baths, keyed L, M, R."""

    params: DeviceParams
    baths: tuple[BathSpec, BathSpec, BathSpec]

    def bath(self, label: str) -> BathSpec:
        return self.baths[BATH_LABELS.index(label)]

    def replace_temperature(self, label: str, temperature: float) -> "Config":
        new = tuple(
            BathSpec(b.label, temperature, b.gamma, b.spectrum) if b.label == label else b
            for b in self.baths
        )
        return Config(self.params, new)


def validate_params(params: DeviceParams, baths) -> Config:
    """Check a device plus exactly three baths labelled L, M, R.

    `baths` may be a sequence of BathSpec or a mapping label -> BathSpec.
    Returns the validated Config; raises the specific violation otherwise.
    """
    if hasattr(baths, "values"):
        baths = list(baths.values())
    baths = list(baths)
    labels = sorted(b.label for b in baths)
    if labels != sorted(BATH_LABELS):
        raise OrderingViolation(f"need exactly one bath per terminal L, M, R; got labels {labels}")
    ordered = tuple(next(b for b in baths if b.label == lab) for lab in BATH_LABELS)
    # DeviceParams and BathSpec validate themselves on construction; re-run
    # the device checks here so callers that bypassed the dataclass get them.
    DeviceParams(params.omega_L, params.omega_M, params.omega_R, params.g)
    return Config(params, ordered)


def thermal_occupation(omega: float, temperature: float) -> float:
    """Mean thermal excitation number n = 1 / (exp(omega/T) - 1).

    Exactly 0 at T = 0; expm1 keeps small omega/T accurate down to 1e-12.
    """
    if omega <= 0.0:
        raise NonPositiveFrequency(f"occupation needs omega > 0, got {omega!r}")
    if temperature < 0.0:
        raise OrderingViolation(f"temperature must be >= 0, got {temperature!r}")
    if temperature == 0.0:
        return 0.0
    x = omega / temperature
    if x > 700.0:  # exp would overflow; occupation is indistinguishable from 0
        return 0.0
    return 1.0 / math.expm1(x)


def damping_rate(bath: BathSpec, omega: float) -> float:
    """Effective damping rate gamma(omega): flat -> gamma, Ohmic -> gamma * omega."""
    if omega <= 0.0:
        raise NonPositiveFrequency(f"damping rate needs omega > 0, got {omega!r}")
    if bath.spectrum is Spectrum.OHMIC:
        return bath.gamma * omega
    return bath.gamma


def spectral_density(bath: BathSpec, omega_signed: float) -> float:
    """Absorption (omega > 0) or emission (omega < 0) rate weight J(omega).

    J(+omega) = gamma(omega) n(omega); J(-omega) = gamma(omega) (n(omega) + 1).
    Both are nonnegative.
    """
    if omega_signed == 0.0:
        raise NonPositiveFrequency("spectral density needs a nonzero signed frequency")
    omega = abs(omega_signed)
    g_w = damping_rate(bath, omega)
    n = thermal_occupation(omega, bath.temperature)
    if omega_signed > 0.0:
        return g_w * n
    return g_w * (n + 1.0)


@dataclass(frozen=True)
class SecularReport:
    """Secular-approximation health check.

    valid is a convention (ratio < SECULAR_THRESHOLD), surfaced as a warning
    rather than a hard error; min_gap is the smallest within-bath Bohr gap
    and max_gamma the largest effective damping rate over attached baths.
    """

    min_gap: float
    max_gamma: float
    ratio: float
    valid: bool
