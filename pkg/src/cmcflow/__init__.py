"""Homogeneous vacuum cosmologies with positive cosmological constant.

Closed-form background solutions, the warped-product scale-factor ODE
families over doubled Einstein manifolds, adaptive and fixed-step
integration with blow-up detection, and experiment drivers for recollapse
classification, critical-coupling bisection, limit extraction and
reduced-Hamiltonian audits.
"""

__version__ = "0.1.0"

from .background import (
    BackgroundModel,
    CurvatureSign,
    GaugeDomainError,
    GaugeQuantities,
    cmc_time_maps,
    gauge_quantities,
    homogeneous_lapse,
    mean_curvature,
    rescaled_background_residual,
    scale_factor,
)
from .products import (
    BlowUpOverflow,
    FlowConfig,
    FlowState,
    Observables,
    first_integral_residual,
    initial_state,
    limit_volume_ratio,
    observables,
    rhs,
)
from .integrate import (
    BLOW_UP_EVENT,
    REACHED_HORIZON,
    STEP_SIZE_COLLAPSE,
    EventSpec,
    IntegratorSettings,
    Termination,
    TimeSymmetryError,
    Trajectory,
    backward_integrate,
    integrate,
    integrate_oracle,
)
from .experiments import (
    AUDIT_CONSTANT,
    AUDIT_NON_DECREASING,
    AUDIT_NON_INCREASING,
    AUDIT_NON_MONOTONE,
    VERDICT_COMPLETE,
    VERDICT_RECOLLAPSE,
    BisectionResult,
    BracketError,
    Classification,
    GaugeRangeError,
    HamiltonianAudit,
    LimitEstimate,
    PreconditionError,
    RegimeError,
    SweepRow,
    bisect_critical,
    classify,
    hamiltonian_audit,
    limit_Cs,
    sweep,
    thresholds,
)

__all__ = [
    "__version__",
    "BackgroundModel",
    "CurvatureSign",
    "GaugeDomainError",
    "GaugeQuantities",
    "cmc_time_maps",
    "gauge_quantities",
    "homogeneous_lapse",
    "mean_curvature",
    "rescaled_background_residual",
    "scale_factor",
    "BlowUpOverflow",
    "FlowConfig",
    "FlowState",
    "Observables",
    "first_integral_residual",
    "initial_state",
    "limit_volume_ratio",
    "observables",
    "rhs",
    "BLOW_UP_EVENT",
    "REACHED_HORIZON",
    "STEP_SIZE_COLLAPSE",
    "EventSpec",
    "IntegratorSettings",
    "Termination",
    "TimeSymmetryError",
    "Trajectory",
    "backward_integrate",
    "integrate",
    "integrate_oracle",
    "AUDIT_CONSTANT",
    "AUDIT_NON_DECREASING",
    "AUDIT_NON_INCREASING",
    "AUDIT_NON_MONOTONE",
    "VERDICT_COMPLETE",
    "VERDICT_RECOLLAPSE",
    "BisectionResult",
    "BracketError",
    "Classification",
    "GaugeRangeError",
    "HamiltonianAudit",
    "LimitEstimate",
    "PreconditionError",
    "RegimeError",
    "SweepRow",
    "bisect_critical",
    "classify",
    "hamiltonian_audit",
    "limit_Cs",
    "sweep",
    "thresholds",
]
