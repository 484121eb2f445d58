"""Exact lock-in ranges for second-order type 2 PLLs with a piecewise-linear
phase detector, cross-validated by an independent simulation oracle."""

from .errors import ApplicabilityError, LoopParameterError, NumericsError
from .lockin import (
    EstimateSet,
    LockInResult,
    best_estimate,
    conservative_lock_in,
    estimates,
    gardner_estimate,
    huque_stensby_pull_out,
    lambert_w0,
    lock_in_frequency,
    lock_in_ranges,
    solve_d,
    y_conservative,
    y_lock_in,
)
from .model import (
    DerivedCoeffs,
    Equilibrium,
    EquilibriumKind,
    LoopParams,
    ReducedState,
    StabilityCase,
    State,
    derived_coeffs,
    equilibria,
    from_reduced,
    linearization,
    lyapunov_value,
    lyapunov_values,
    pd_characteristic,
    pd_derivative,
    reduced_rhs,
    rhs,
    sample_loop_params,
    stable_equilibrium_kind,
    time_scale,
    to_reduced,
)
from .separatrix import (
    SeparatrixCurve,
    SeparatrixLandmarks,
    build_curve,
    implicit_residual,
    s_domain1,
    s_domain2,
    s_domain3,
)
from .simulate import (
    IntegratorOptions,
    SlipFlags,
    StepScenario,
    Trajectory,
    conservative_lock_in_numeric,
    detect_slip,
    integrate,
    integrate_reduced,
    lock_in_numeric,
    lyapunov_audit,
    separatrix_landmarks_numeric,
    simulate_step,
    trace_separatrix_numeric,
)

__version__ = "0.1.0"

__all__ = [
    "ApplicabilityError",
    "DerivedCoeffs",
    "Equilibrium",
    "EquilibriumKind",
    "EstimateSet",
    "IntegratorOptions",
    "LockInResult",
    "LoopParameterError",
    "LoopParams",
    "NumericsError",
    "ReducedState",
    "SeparatrixCurve",
    "SeparatrixLandmarks",
    "SlipFlags",
    "StabilityCase",
    "State",
    "StepScenario",
    "Trajectory",
    "best_estimate",
    "build_curve",
    "conservative_lock_in",
    "conservative_lock_in_numeric",
    "derived_coeffs",
    "detect_slip",
    "equilibria",
    "estimates",
    "from_reduced",
    "gardner_estimate",
    "huque_stensby_pull_out",
    "implicit_residual",
    "integrate",
    "integrate_reduced",
    "lambert_w0",
    "linearization",
    "lock_in_frequency",
    "lock_in_numeric",
    "lock_in_ranges",
    "lyapunov_audit",
    "lyapunov_value",
    "lyapunov_values",
    "pd_characteristic",
    "pd_derivative",
    "reduced_rhs",
    "rhs",
    "s_domain1",
    "s_domain2",
    "s_domain3",
    "sample_loop_params",
    "separatrix_landmarks_numeric",
    "simulate_step",
    "solve_d",
    "stable_equilibrium_kind",
    "time_scale",
    "to_reduced",
    "trace_separatrix_numeric",
    "y_conservative",
    "y_lock_in",
]
