"""Baseband model of a second-order type 2 analog PLL with a piecewise-linear
phase detector characteristic.

The loop state is the pair ``(x, theta_e)``: loop-filter state and phase error.
``theta_e`` is deliberately *not* wrapped modulo 2*pi -- cycle-slip metrics
need the unwrapped value.  A change of variables removes the frequency error
and the physical time scale, producing the dimensionless "reduced" system in
``(y, theta_e)`` whose saddle separatrices determine the lock-in behaviour.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import LoopParameterError

TWO_PI = 2.0 * math.pi

# Relative tolerance on a^2*k vs 4 below which the stable equilibrium is
# treated as a degenerate node.  The lock-in formulas are continuous across
# this boundary, so a misclassification inside the band changes results by
# O(tolerance).
CASE_REL_TOL = 1e-9


class StabilityCase(Enum):
    """Type of the stable equilibria, decided by the sign of a^2*k - 4."""

    NODE = "node"
    DEGENERATE_NODE = "degenerate-node"
    FOCUS = "focus"


class EquilibriumKind(Enum):
    STABLE_NODE = "stable-node"
    STABLE_DEGENERATE_NODE = "stable-degenerate-node"
    STABLE_FOCUS = "stable-focus"
    SADDLE = "saddle"


_STABLE_KIND = {
    StabilityCase.NODE: EquilibriumKind.STABLE_NODE,
    StabilityCase.DEGENERATE_NODE: EquilibriumKind.STABLE_DEGENERATE_NODE,
    StabilityCase.FOCUS: EquilibriumKind.STABLE_FOCUS,
}


def _require_slope(k: float) -> None:
    if not (k > 1.0 / math.pi):
        raise LoopParameterError(
            f"PD slope k must exceed 1/pi ~= {1.0 / math.pi:.6f}, got {k!r}"
        )


@dataclass(frozen=True)
class LoopParams:
    """Physical loop parameters.

    tau1, tau2 : loop-filter time constants, s (> 0)
    k_vco      : VCO gain, rad/(s*V) (> 0)
    k          : rising slope of the PD characteristic, dimensionless (> 1/pi)
    """

    tau1: float
    tau2: float
    k_vco: float
    k: float

    def __post_init__(self) -> None:
        for name in ("tau1", "tau2", "k_vco"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise LoopParameterError(f"{name} must be a positive finite number, got {value!r}")
        _require_slope(self.k)


@dataclass(frozen=True)
class DerivedCoeffs:
    """Dimensionless coefficients of the reduced system.

    a = tau2 * sqrt(k_vco / tau1)
    b = sqrt(|a^2 - 4/k|)
    c = sqrt(a^2 + 4*(pi - 1/k))
    """

    a: float
    b: float
    c: float
    case: StabilityCase


@dataclass(frozen=True)
class State:
    """Loop state in physical coordinates."""

    x: float
    theta_e: float


@dataclass(frozen=True)
class ReducedState:
    """State of the dimensionless reduced system.

    ``y = sqrt(tau1/k_vco) * omega_e_free - sqrt(k_vco/tau1) * (x + tau2 * v_e(theta_e))``
    and the reduced time is ``tau = sqrt(k_vco/tau1) * t``.
    """

    y: float
    theta_e: float


@dataclass(frozen=True)
class Equilibrium:
    x_eq: float
    theta_eq: float
    kind: EquilibriumKind


def derived_coeffs(params: LoopParams) -> DerivedCoeffs:
    """Dimensionless coefficients (a, b, c) and the stability case."""
    a = params.tau2 * math.sqrt(params.k_vco / params.tau1)
    k = params.k
    disc = a * a * k - 4.0
    if abs(disc) <= 4.0 * CASE_REL_TOL:
        case = StabilityCase.DEGENERATE_NODE
    elif disc > 0.0:
        case = StabilityCase.NODE
    else:
        case = StabilityCase.FOCUS
    b = math.sqrt(abs(a * a - 4.0 / k))
    c = math.sqrt(a * a + 4.0 * (math.pi - 1.0 / k))
    return DerivedCoeffs(a=a, b=b, c=c, case=case)


def time_scale(params: LoopParams) -> float:
    """Factor between physical and reduced time: tau = time_scale * t."""
    return math.sqrt(params.k_vco / params.tau1)


# ---------------------------------------------------------------------------
# Phase-detector characteristic
# ---------------------------------------------------------------------------

def _wrap(theta: float) -> float:
    """Map theta to the base period [-pi, pi)."""
    return theta - TWO_PI * math.floor(theta / TWO_PI + 0.5)


def _pd_scalar(theta: float, k: float) -> float:
    xi = _wrap(theta)
    ax = abs(xi)
    if ax <= 1.0 / k:
        return k * xi
    v = (math.pi - ax) / (math.pi - 1.0 / k)
    return v if xi >= 0.0 else -v


def _pd_slope_scalar(theta: float, k: float) -> float:
    # At the breakpoints +-1/k the rising-segment slope is returned; the
    # characteristic itself is continuous, so any finite convention there
    # produces the same trajectories.
    xi = _wrap(theta)
    if abs(xi) <= 1.0 / k:
        return k
    return -1.0 / (math.pi - 1.0 / k)


def pd_characteristic(theta_e, k: float):
    """PD output v_e(theta_e): 2*pi-periodic, continuous, odd.

    Rising slope k on [-1/k, 1/k], falling slope -1/(pi - 1/k) elsewhere in
    the period.  Accepts scalars or arrays.
    """
    _require_slope(k)
    if np.ndim(theta_e) == 0:
        return _pd_scalar(float(theta_e), k)
    theta = np.asarray(theta_e, dtype=float)
    xi = theta - TWO_PI * np.round(theta / TWO_PI)
    ax = np.abs(xi)
    falling = np.sign(xi) * (math.pi - ax) / (math.pi - 1.0 / k)
    return np.where(ax <= 1.0 / k, k * xi, falling)


def pd_derivative(theta_e, k: float):
    """Slope of the PD characteristic (rising-side value at breakpoints)."""
    _require_slope(k)
    if np.ndim(theta_e) == 0:
        return _pd_slope_scalar(float(theta_e), k)
    theta = np.asarray(theta_e, dtype=float)
    xi = theta - TWO_PI * np.round(theta / TWO_PI)
    return np.where(np.abs(xi) <= 1.0 / k, k, -1.0 / (math.pi - 1.0 / k))


def _pd_integral(theta_e, k: float):
    """Closed-form antiderivative of v_e with value 0 at theta_e = 0.

    v_e has zero mean over a period, so the integral is itself 2*pi-periodic
    and even: piecewise quadratic, assembled per period.
    """
    peak = 1.0 / (2.0 * k)
    fall = math.pi - 1.0 / k
    if np.ndim(theta_e) == 0:
        ax = abs(_wrap(float(theta_e)))
        if ax <= 1.0 / k:
            return 0.5 * k * ax * ax
        return peak + (fall * fall - (math.pi - ax) ** 2) / (2.0 * fall)
    theta = np.asarray(theta_e, dtype=float)
    xi = theta - TWO_PI * np.round(theta / TWO_PI)
    ax = np.abs(xi)
    outer = peak + (fall * fall - (math.pi - ax) ** 2) / (2.0 * fall)
    return np.where(ax <= 1.0 / k, 0.5 * k * ax * ax, outer)


# ---------------------------------------------------------------------------
# Vector fields
# ---------------------------------------------------------------------------

def rhs(state: State, params: LoopParams, omega_e_free: float) -> tuple[float, float]:
    """Right-hand side of the loop ODE in physical coordinates.

    dx/dt      = v_e(theta_e)
    dtheta/dt  = omega_e_free - (k_vco/tau1) * (x + tau2 * v_e(theta_e))
    """
    ve = _pd_scalar(state.theta_e, params.k)
    dtheta = omega_e_free - params.k_vco / params.tau1 * (state.x + params.tau2 * ve)
    return ve, dtheta


def reduced_rhs(state: ReducedState, coeffs: DerivedCoeffs, k: float) -> tuple[float, float]:
    """Right-hand side of the reduced system.

    dy/dtau     = -a * v_e'(theta_e) * y - v_e(theta_e)
    dtheta/dtau = y
    """
    ve = _pd_scalar(state.theta_e, k)
    vp = _pd_slope_scalar(state.theta_e, k)
    return -coeffs.a * vp * state.y - ve, state.y


def to_reduced(state: State, params: LoopParams, omega_e_free: float) -> ReducedState:
    """Map a physical state to reduced coordinates."""
    s = time_scale(params)
    ve = _pd_scalar(state.theta_e, params.k)
    y = omega_e_free / s - s * (state.x + params.tau2 * ve)
    return ReducedState(y=y, theta_e=state.theta_e)


def from_reduced(state: ReducedState, params: LoopParams, omega_e_free: float) -> State:
    """Inverse of :func:`to_reduced`."""
    s = time_scale(params)
    ve = _pd_scalar(state.theta_e, params.k)
    x = omega_e_free * params.tau1 / params.k_vco - state.y / s - params.tau2 * ve
    return State(x=x, theta_e=state.theta_e)


# ---------------------------------------------------------------------------
# Equilibria and local structure
# ---------------------------------------------------------------------------

def stable_equilibrium_kind(params: LoopParams) -> EquilibriumKind:
    return _STABLE_KIND[derived_coeffs(params).case]


def equilibria(params: LoopParams, omega_e_free: float, m_range) -> list[Equilibrium]:
    """The equilibria (tau1*omega_e_free/k_vco, pi*m) for integer m in m_range.

    Even multiples of pi are the stable kind decided by the case trichotomy;
    odd multiples are saddles.
    """
    x_eq = params.tau1 * omega_e_free / params.k_vco
    stable_kind = stable_equilibrium_kind(params)
    out = []
    for m in m_range:
        kind = stable_kind if m % 2 == 0 else EquilibriumKind.SADDLE
        out.append(Equilibrium(x_eq=x_eq, theta_eq=math.pi * m, kind=kind))
    return out


def linearization(params: LoopParams, theta_e: float) -> np.ndarray:
    """Jacobian of the physical vector field at (x, theta_e), any x.

    The field depends on x linearly, so the Jacobian is a function of
    theta_e only (through the PD slope).
    """
    vp = _pd_slope_scalar(theta_e, params.k)
    g = params.k_vco / params.tau1
    return np.array([[0.0, vp], [-g, -g * params.tau2 * vp]])


def lyapunov_value(state: State, params: LoopParams, omega_e_free: float) -> float:
    """Energy-like function: quadratic filter term plus the PD integral.

    Nonincreasing along trajectories; zero exactly at the stable equilibria
    with theta_e a multiple of 2*pi.
    """
    dx = state.x - params.tau1 * omega_e_free / params.k_vco
    return params.k_vco / (2.0 * params.tau1) * dx * dx + _pd_integral(state.theta_e, params.k)


def lyapunov_values(x, theta_e, params: LoopParams, omega_e_free: float):
    """Vectorized :func:`lyapunov_value` over arrays of samples."""
    x = np.asarray(x, dtype=float)
    dx = x - params.tau1 * omega_e_free / params.k_vco
    return params.k_vco / (2.0 * params.tau1) * dx * dx + _pd_integral(theta_e, params.k)


def sample_loop_params(
    rng: np.random.Generator,
    case: StabilityCase,
    tau1: float = 0.05,
    tau2: float = 0.02,
) -> LoopParams:
    """Random loop parameters whose stable equilibria fall in the given case.

    Draws the dimensionless pair (a, k) inside the requested case region and
    scales k_vco to realize it at the given time constants.  Intended for
    randomized cross-validation batches.
    """
    k_min = 1.0 / math.pi
    if case is StabilityCase.NODE:
        a = rng.uniform(1.2, 5.0)
        k = rng.uniform(max(1.02 * k_min, 1.06 * 4.0 / (a * a)), 4.0)
    elif case is StabilityCase.FOCUS:
        a = rng.uniform(0.3, 3.0)
        k = rng.uniform(1.06 * k_min, min(4.0, 0.94 * 4.0 / (a * a)))
    else:
        a = rng.uniform(1.05, 3.4)  # keeps k = 4/a^2 inside (1/pi, 4]
        k = 4.0 / (a * a)
    k_vco = tau1 * (a / tau2) ** 2
    return LoopParams(tau1=tau1, tau2=tau2, k_vco=k_vco, k=k)
