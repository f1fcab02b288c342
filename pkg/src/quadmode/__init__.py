"""quadmode: closed-form dynamics of one radiation mode under a
time-dependent quadratic Hamiltonian, with squeezing and phase observables
and Monte Carlo support for randomly varying media."""

__version__ = "0.1.0"

from .errors import (
    QuadmodeError,
    ConfigError,
    CoefficientEvaluationError,
    SingularCoefficientError,
    InvalidMediumError,
    StiffnessError,
    BlowUpError,
    SingularityError,
    TurningPointError,
    PathRejectedError,
    EnsembleError,
)
from .coefficients import (
    ConstantFunction,
    ExponentialFunction,
    SinusoidFunction,
    TableFunction,
    CoefficientSet,
    MediumProfile,
    medium_to_hamiltonian,
    preset_coefficients,
    function_from_spec,
    eval_coeffs,
)
from .characteristic import (
    CharacteristicBasis,
    build_tau_sigma,
    integrate_characteristic,
    compute_lambda,
    classical_mode_equivalence,
)
from .ermakov import (
    ErmakovInit,
    ErmakovPath,
    ComplexFrame,
    build_frame,
    closed_form_path,
    solve_ermakov,
    HomogeneousState,
    HomogeneousDriven,
    homogeneous_state,
    homogeneous_driven,
    homogeneous_driven_quadrature,
)
from .verify import (
    QuasiInvariants,
    riccati_oracle,
    quasi_invariants,
    wronskian_drift,
)
from .observables import (
    OperatorPath,
    FockObservables,
    ansatz_coefficients,
    ansatz_path,
    operator_invariant_defect,
    heisenberg_residual,
    means,
    variances,
    hamiltonian_expectation,
    phase_rates,
    geometric_rate_state_route,
    accumulate_phases,
    mode_amplitudes,
    compute_observables,
)
from .stochastic import (
    NoiseSpec,
    EnsembleSummary,
    TRACKED_OBSERVABLES,
    noise_values,
    sample_path,
    run_ensemble,
)
from .config import (
    Scenario,
    GridSpec,
    load_config,
    parse_config,
    build_grid,
    bundled_scenarios,
)

__all__ = [
    "__version__",
    "QuadmodeError",
    "ConfigError",
    "CoefficientEvaluationError",
    "SingularCoefficientError",
    "InvalidMediumError",
    "StiffnessError",
    "BlowUpError",
    "SingularityError",
    "TurningPointError",
    "PathRejectedError",
    "EnsembleError",
    "ConstantFunction",
    "ExponentialFunction",
    "SinusoidFunction",
    "TableFunction",
    "CoefficientSet",
    "MediumProfile",
    "medium_to_hamiltonian",
    "preset_coefficients",
    "function_from_spec",
    "eval_coeffs",
    "CharacteristicBasis",
    "build_tau_sigma",
    "integrate_characteristic",
    "compute_lambda",
    "classical_mode_equivalence",
    "ErmakovInit",
    "ErmakovPath",
    "ComplexFrame",
    "build_frame",
    "closed_form_path",
    "solve_ermakov",
    "HomogeneousState",
    "HomogeneousDriven",
    "homogeneous_state",
    "homogeneous_driven",
    "homogeneous_driven_quadrature",
    "QuasiInvariants",
    "riccati_oracle",
    "quasi_invariants",
    "wronskian_drift",
    "OperatorPath",
    "FockObservables",
    "ansatz_coefficients",
    "ansatz_path",
    "operator_invariant_defect",
    "heisenberg_residual",
    "means",
    "variances",
    "hamiltonian_expectation",
    "phase_rates",
    "geometric_rate_state_route",
    "accumulate_phases",
    "mode_amplitudes",
    "compute_observables",
    "NoiseSpec",
    "EnsembleSummary",
    "TRACKED_OBSERVABLES",
    "noise_values",
    "sample_path",
    "run_ensemble",
    "Scenario",
    "GridSpec",
    "load_config",
    "parse_config",
    "build_grid",
    "bundled_scenarios",
]
