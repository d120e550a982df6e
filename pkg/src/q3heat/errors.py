"""Exception hierarchy.

Two broad families map onto the CLI exit codes: configuration problems
(exit 2) and numerical problems (exit 3).
"""


class Q3HeatError(Exception):
    """Base class for all package errors."""


class ConfigurationError(Q3HeatError):
    """Invalid parameters, bath specs, run configs or sweep specs (exit 2)."""


class NumericalError(Q3HeatError):
    """Solver or consistency failures on otherwise valid input (exit 3)."""


# -- configuration ----------------------------------------------------------

class ResonanceViolation(ConfigurationError):
    """omega_L + omega_M deviates from omega_R beyond tolerance."""


class OrderingViolation(ConfigurationError):
    """Frequency ordering omega_R > omega_L > omega_M > 0 or g > 0 violated."""


class DegenerateQubits(ConfigurationError):
    """Two qubit frequencies coincide; the secular treatment breaks down."""


class NonPositiveFrequency(ConfigurationError):
    """A positive transition frequency was required."""


class ConfigParseError(ConfigurationError):
    """Run-config file could not be parsed; message names the field."""


class InvalidSpec(ConfigurationError):
    """Sweep specification violates its invariants."""


# -- numerics ---------------------------------------------------------------

class SingularSteadyState(NumericalError):
    """Null space of the rate generator has dimension > 1 (e.g. all baths detached)."""


class NumericalInstability(NumericalError):
    """Condition estimate leaves fewer than six trustworthy digits, or
    populations came out negative beyond tolerance."""


class ChannelInconsistency(NumericalError):
    """A dissipation channel's level spacing disagrees with its frequency."""


class FirstLawViolation(NumericalError):
    """Heat currents fail to sum to zero at steady state."""


class SecondLawViolation(NumericalError):
    """Entropy production came out negative beyond round-off."""


class ConvergenceFailure(NumericalError):
    """Dense eigensolver failed to converge."""


class NoConvergence(NumericalError):
    """Relaxation trajectory did not reach the residual target within the time cap."""


# -- analysis-level degradations -------------------------------------------

class DegenerateDenominator(Q3HeatError):
    """Control-current derivative below floor; amplification undefined here."""


class BothCurrentsZero(Q3HeatError):
    """Forward and backward currents both vanish; rectification undefined."""


class PointFailure(NumericalError):
    """Too many sweep grid points failed to evaluate."""


class SchemaMismatch(ConfigurationError):
    """CSV columns do not match the expected sweep schema."""
