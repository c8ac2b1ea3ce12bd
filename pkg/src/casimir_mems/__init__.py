"""Statics, nonlinear resonance, and calibration of a torsional oscillator
driven through a sphere-plate Casimir interaction."""

from .calibration import (
    FitResult,
    ShiftDataset,
    casimir_shift_model,
    electrostatic_shift_model,
    fit_casimir_offset,
    fit_electrostatic_geometry,
    fit_residual_voltage,
    synthesize_shift_dataset,
)
from .config import default_paper_config
from .constants import CODATA, PhysicalConstants
from .dynamics import (
    OscillatorState,
    SweepProtocol,
    SweepResult,
    Trajectory,
    extract_steady_amplitude,
    integrate,
    swept_distance,
    swept_frequency,
)
from .errors import (
    CasimirMemsError,
    ConfigError,
    DegenerateDataError,
    DomainError,
    FitError,
    InstabilityError,
    InsufficientDataError,
    NotAMaximumError,
    ProximityWarning,
    PullInError,
    StiffnessError,
    UnsupportedOrderError,
)
from .forces import (
    CasimirSpherePlateLaw,
    ElectrostaticConfig,
    ElectrostaticSphereLaw,
    NullForceLaw,
    ParallelPlateGeometry,
    SpherePlateGeometry,
    casimir_interaction_energy,
    casimir_parallel_plate,
    casimir_sphere_plate,
    casimir_sphere_plate_derivative,
    electrostatic_gradient,
)
from .resonance import (
    AmplitudeSolution,
    DriveConfig,
    ResponseCurve,
    TaylorCoefficients,
    TorsionalOscillator,
    hysteresis_window,
    linearized_shift,
    response_curve,
    steady_state_amplitudes,
    taylor_coefficients,
)
from .statics import (
    EquilibriumSet,
    SpringSphereModel,
    critical_separation,
    critical_separation_bisect,
    find_equilibria,
    total_potential,
)

__version__ = "0.1.0"

__all__ = [
    "CODATA",
    "AmplitudeSolution",
    "CasimirMemsError",
    "CasimirSpherePlateLaw",
    "ConfigError",
    "DegenerateDataError",
    "DomainError",
    "DriveConfig",
    "ElectrostaticConfig",
    "ElectrostaticSphereLaw",
    "EquilibriumSet",
    "FitError",
    "FitResult",
    "InstabilityError",
    "InsufficientDataError",
    "NotAMaximumError",
    "NullForceLaw",
    "OscillatorState",
    "ParallelPlateGeometry",
    "PhysicalConstants",
    "ProximityWarning",
    "PullInError",
    "ResponseCurve",
    "ShiftDataset",
    "SpherePlateGeometry",
    "SpringSphereModel",
    "StiffnessError",
    "SweepProtocol",
    "SweepResult",
    "TaylorCoefficients",
    "TorsionalOscillator",
    "Trajectory",
    "UnsupportedOrderError",
    "casimir_interaction_energy",
    "casimir_parallel_plate",
    "casimir_shift_model",
    "casimir_sphere_plate",
    "casimir_sphere_plate_derivative",
    "critical_separation",
    "critical_separation_bisect",
    "default_paper_config",
    "electrostatic_gradient",
    "electrostatic_shift_model",
    "extract_steady_amplitude",
    "find_equilibria",
    "fit_casimir_offset",
    "fit_electrostatic_geometry",
    "fit_residual_voltage",
    "hysteresis_window",
    "integrate",
    "linearized_shift",
    "response_curve",
    "steady_state_amplitudes",
    "swept_distance",
    "swept_frequency",
    "synthesize_shift_dataset",
    "taylor_coefficients",
    "total_potential",
]
