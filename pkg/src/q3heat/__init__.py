"""q3heat: steady-state heat transport in a three-qubit thermal device.

Three resonantly coupled qubits, each attached to its own thermal bath,
form a multifunctional heat machine: transistor, modulator, switch,
stabilizer, valve and rectifier. This package solves the secular master
equation's steady state analytically-plus-linearly (8x8), cross-checks it
against a full 64-dimensional generator, and quantifies each function
over deterministic parameter sweeps.
"""

from ._backend import available_backends, backend_name
from ._version import __version__
from .eigensystem import (
    CHANNEL_PAIRS,
    EigenSystem,
    TransitionChannel,
    alpha_angles,
    analytic_eigensystem,
    bohr_frequencies,
    build_channels,
    build_hamiltonian,
    coupling_operator,
    numeric_diagonalization_oracle,
    secular_report,
)
from .functions import (
    AmplificationResult,
    RectificationResult,
    StabilizerReport,
    SwitchReport,
    ValveReport,
    amplification,
    rectification,
    stabilizer_sensitivity,
    switch_threshold,
    valve_crossings,
)
from .model import (
    BathSpec,
    Config,
    DeviceParams,
    SecularReport,
    Spectrum,
    damping_rate,
    spectral_density,
    thermal_occupation,
    validate_params,
)
from .oracles import (
    LiouvillianSolution,
    RelaxationResult,
    liouvillian_matrix,
    liouvillian_oracle,
    relaxation_oracle,
)
from .steady import (
    BatchEvaluator,
    HeatCurrents,
    RateMatrices,
    SteadyState,
    build_rate_matrices,
    heat_currents,
    solve_steady,
    steady_point,
)
from .sweep import (
    RunConfig,
    SweepAxis,
    SweepResult,
    read_config,
    read_csv,
    run_sweep,
    write_csv,
)

__all__ = [
    "__version__",
    "available_backends",
    "backend_name",
    # model
    "BathSpec", "Config", "DeviceParams", "SecularReport", "Spectrum",
    "damping_rate", "spectral_density", "thermal_occupation", "validate_params",
    # eigensystem
    "CHANNEL_PAIRS", "EigenSystem", "TransitionChannel", "alpha_angles",
    "analytic_eigensystem", "bohr_frequencies", "build_channels",
    "build_hamiltonian", "coupling_operator", "numeric_diagonalization_oracle",
    "secular_report",
    # steady
    "BatchEvaluator", "HeatCurrents", "RateMatrices", "SteadyState",
    "build_rate_matrices", "heat_currents", "solve_steady", "steady_point",
    # oracles
    "LiouvillianSolution", "RelaxationResult", "liouvillian_matrix",
    "liouvillian_oracle", "relaxation_oracle",
    # functions
    "AmplificationResult", "RectificationResult", "StabilizerReport",
    "SwitchReport", "ValveReport", "amplification", "rectification",
    "stabilizer_sensitivity", "switch_threshold", "valve_crossings",
    # sweep/io
    "RunConfig", "SweepAxis", "SweepResult", "read_config", "read_csv",
    "run_sweep", "write_csv",
]
