"""Dissipative sweep-through-resonance toolkit.

Simulates the reduced two-level Bloch system with dephasing (and the
unrotated three-component variant with relaxation) under a swept bias,
extracts the asymptotic population difference x(+inf), provides the
closed-form limiting values, and fits the dephasing rate to measured
(v, x_inf) data.
"""

from .analysis import (
    FitProblem,
    FitResult,
    SweepGrid,
    SweepRow,
    SweepTable,
    find_xinf_minimum,
    fit_gamma_d,
    sweep,
)
from .errors import (
    ConfigError,
    InstabilityError,
    InvalidInputError,
    InvalidProfileError,
    LzdecError,
    NonConvergenceError,
    UndefinedRotationError,
    UnidentifiableFitError,
)
from .integrator import (
    SimConfig,
    TransitionResult,
    auto_window,
    integrate,
    integrate_full,
)
from .limits import (
    LimitKind,
    incoherent_trajectory,
    incoherent_xinf,
    kayanuma_paper_xinf,
    landau_zener_xinf,
    limit_xinf,
    third_order_defect,
    third_order_residual,
)
from .model import (
    FullState,
    InitialCondition,
    LinearBias,
    ModelParams,
    PiecewiseLinearBias,
    ReducedState,
    SinusoidalBias,
    TabulatedBias,
    apply_relaxation_envelope,
    derivative_full,
    derivative_reduced,
    reduced_norm,
    rotate_from_reduced,
    rotate_to_reduced,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # model
    "ModelParams",
    "LinearBias",
    "PiecewiseLinearBias",
    "SinusoidalBias",
    "TabulatedBias",
    "ReducedState",
    "FullState",
    "InitialCondition",
    "reduced_norm",
    "derivative_reduced",
    "derivative_full",
    "rotate_to_reduced",
    "rotate_from_reduced",
    "apply_relaxation_envelope",
    # integrator
    "SimConfig",
    "TransitionResult",
    "auto_window",
    "integrate",
    "integrate_full",
    # limits
    "LimitKind",
    "landau_zener_xinf",
    "kayanuma_paper_xinf",
    "incoherent_trajectory",
    "incoherent_xinf",
    "limit_xinf",
    "third_order_residual",
    "third_order_defect",
    # analysis
    "SweepGrid",
    "SweepRow",
    "SweepTable",
    "sweep",
    "find_xinf_minimum",
    "FitProblem",
    "FitResult",
    "fit_gamma_d",
    # errors
    "LzdecError",
    "InvalidInputError",
    "InvalidProfileError",
    "ConfigError",
    "UndefinedRotationError",
    "NonConvergenceError",
    "InstabilityError",
    "UnidentifiableFitError",
]
