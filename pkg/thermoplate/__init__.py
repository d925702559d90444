"""
Spectral Galerkin simulator for hinged thermoelastic plates with time-dependent coupling.
"""

from .attractor import (
    EmptyEnsembleError,
    EnsembleSet,
    PullbackLevel,
    PullbackRun,
    absorbing_radius,
    default_schedule,
    evolve_ensemble,
    hausdorff_semidist,
    pullback_iterate,
    sample_ball,
    tail_fraction,
)
from .coeffs import (
    AdmissibilityError,
    CoefficientFunction,
    CoefficientReport,
    LipschitzReport,
    NonlinearitySpec,
    Witness,
    admissible_rho,
    antiderivative_error,
    dissipativity_margin,
    eval_a,
    eval_antiderivative,
    eval_antiderivative_rate,
    eval_f,
    lipschitz_estimate,
    nemytskii,
    validate_a,
    validate_nonlinearity,
)
from .config import ConfigError, ExperimentConfig, dump_config, load_config, parse_config
from .constants import (
    CoefficientVariant,
    ExitCode,
    NonlinearityVariant,
    NormSpace,
    OperatorKind,
    OutputFormat,
)
from .data_classes import BoxDomain, IndexRangeError, ShapeError, SpectralField, State
from .dynamics import (
    BlowUpError,
    DecayFit,
    DecayFitError,
    EvolutionConfig,
    SelfConvergence,
    TrajectoryRecord,
    compact_part,
    composition_gap,
    decay_fit,
    energy_identity_order,
    energy_identity_residual,
    evolve,
    linear_process,
    process_norm,
    propagate,
    self_convergence,
    step_full,
    step_linear,
)
from .energy import (
    EnergyRate,
    EnergyReport,
    HypothesisError,
    InfeasibleWindowError,
    LyapunovConfig,
    LyapunovConfigError,
    apriori_bound,
    choose_constants,
    decay_envelope_check,
    energy_E,
    energy_rate,
    lyapunov_L,
    phi,
    psi,
    trajectory_radius,
    verify_decay_inequality,
    verify_equivalence,
)
from .operators import (
    ModeOperator,
    OperatorDomainError,
    OperatorUsageError,
    PhysicalParams,
    build,
    check_inverse,
    determinant,
    hoelder_gap,
    hurwitz_minors,
    mode_decay_rate,
    resolvent_bound,
)
from .spectral import dst_forward, dst_inverse, eigenvalue_mu, grid_integral, norm, y_norm

__all__ = [
    "AdmissibilityError",
    "BlowUpError",
    "BoxDomain",
    "CoefficientFunction",
    "CoefficientReport",
    "CoefficientVariant",
    "ConfigError",
    "DecayFit",
    "DecayFitError",
    "EmptyEnsembleError",
    "EnergyRate",
    "EnergyReport",
    "EnsembleSet",
    "EvolutionConfig",
    "ExitCode",
    "ExperimentConfig",
    "HypothesisError",
    "IndexRangeError",
    "InfeasibleWindowError",
    "LipschitzReport",
    "LyapunovConfig",
    "LyapunovConfigError",
    "ModeOperator",
    "NonlinearitySpec",
    "NonlinearityVariant",
    "NormSpace",
    "OperatorDomainError",
    "OperatorKind",
    "OperatorUsageError",
    "OutputFormat",
    "PhysicalParams",
    "PullbackLevel",
    "PullbackRun",
    "SelfConvergence",
    "ShapeError",
    "SpectralField",
    "State",
    "TrajectoryRecord",
    "Witness",
    "absorbing_radius",
    "admissible_rho",
    "antiderivative_error",
    "apriori_bound",
    "build",
    "check_inverse",
    "choose_constants",
    "compact_part",
    "composition_gap",
    "decay_envelope_check",
    "decay_fit",
    "default_schedule",
    "determinant",
    "dissipativity_margin",
    "dst_forward",
    "dst_inverse",
    "dump_config",
    "eigenvalue_mu",
    "energy_E",
    "energy_identity_order",
    "energy_identity_residual",
    "energy_rate",
    "eval_a",
    "eval_antiderivative",
    "eval_antiderivative_rate",
    "eval_f",
    "evolve",
    "evolve_ensemble",
    "grid_integral",
    "hausdorff_semidist",
    "hoelder_gap",
    "hurwitz_minors",
    "linear_process",
    "lipschitz_estimate",
    "load_config",
    "lyapunov_L",
    "mode_decay_rate",
    "nemytskii",
    "norm",
    "parse_config",
    "phi",
    "process_norm",
    "propagate",
    "psi",
    "pullback_iterate",
    "resolvent_bound",
    "sample_ball",
    "self_convergence",
    "step_full",
    "step_linear",
    "tail_fraction",
    "trajectory_radius",
    "validate_a",
    "validate_nonlinearity",
    "verify_decay_inequality",
    "verify_equivalence",
    "y_norm",
]
