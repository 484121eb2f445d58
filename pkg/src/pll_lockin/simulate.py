"""Numerical oracle for the loop model.

Everything here is deliberately independent of the closed-form results:
trajectories come from adaptive Runge-Kutta integration of the raw vector
fields, lock-in boundaries from bisection on frequency-step experiments, and
the separatrix from backward integration out of the saddle.  Agreement with
the analytic formulas is the package's main cross-validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NumericsError
from .lockin import gardner_estimate
from .model import (
    TWO_PI,
    Equilibrium,
    EquilibriumKind,
    LoopParams,
    ReducedState,
    State,
    _pd_scalar,
    _pd_slope_scalar,
    derived_coeffs,
    lyapunov_values,
    stable_equilibrium_kind,
    time_scale,
)

_DEFAULT_MAX_STEP = 0.25  # reduced-time units


@dataclass(frozen=True)
class IntegratorOptions:
    """Integration controls.

    ``t_max`` and ``max_step`` are expressed in reduced (dimensionless) time;
    physical-time integrations convert internally.  ``convergence_radius`` is
    the lock-detection distance to the nearest equilibrium, measured in
    reduced coordinates so that crossing near a saddle is not mistaken for
    lock.  Defaults left at None are derived from the loop parameters.
    """

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_step: float | None = None
    t_max: float | None = None
    convergence_radius: float = 1e-6

    def __post_init__(self) -> None:
        for name in ("rel_tol", "abs_tol", "convergence_radius"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        for name in ("max_step", "t_max"):
            value = getattr(self, name)
            if value is not None and not value > 0.0:
                raise ValueError(f"{name} must be positive when given")


def _default_t_max(params: LoopParams) -> float:
    # The a/10 term covers the slow relaxation of strongly overdamped loops
    # (the gentle stable-node eigenvalue scales like -1/a in reduced time).
    a = derived_coeffs(params).a
    return 200.0 * max(params.tau1, params.tau2, 1.0 / a, a / 10.0)


@dataclass(frozen=True)
class Trajectory:
    """Integrated trajectory with its cycle-slip metrics.

    ``ys`` has one row per sample; column 0 is the loop-filter state x (for
    ``coords == "original"``) or the reduced variable y (for ``"reduced"``),
    column 1 is the unwrapped phase error.  ``sup_deviation`` is the sup of
    |theta_e(0) - theta_e(t)| over the whole run, ``limsup_deviation`` the
    same sup restricted to the trailing 10% of the time span (a proxy for
    the limit superior once the trajectory has settled).
    """

    t: np.ndarray
    ys: np.ndarray
    coords: str
    sup_deviation: float
    limsup_deviation: float
    converged: bool
    converged_theta: float | None
    converged_to: Equilibrium | None

    @property
    def theta(self) -> np.ndarray:
        return self.ys[:, 1]

    @property
    def primary(self) -> np.ndarray:
        return self.ys[:, 0]


@dataclass(frozen=True)
class SlipFlags:
    """Cycle-slip verdicts under the two deviation metrics."""

    slipped_sup: bool
    slipped_limsup: bool | None
    diagnostic: str | None = None


@dataclass(frozen=True)
class StepScenario:
    """Abrupt frequency-error step from omega_before to omega_after.

    The run starts at an equilibrium of the before-switch system: the stable
    one at theta_e = 0 (``start_at="stable"``) or the saddle at theta_e = -pi
    (``start_at="saddle"``, the conservative variant).
    """

    omega_before: float
    omega_after: float
    start_at: str = "stable"

    def __post_init__(self) -> None:
        if self.start_at not in ("stable", "saddle"):
            raise ValueError(f"start_at must be 'stable' or 'saddle', got {self.start_at!r}")

    def initial_state(self, params: LoopParams) -> State:
        x_eq = params.tau1 * self.omega_before / params.k_vco
        theta = 0.0 if self.start_at == "stable" else -math.pi
        return State(x=x_eq, theta_e=theta)


# ---------------------------------------------------------------------------
# Metric assembly
# ---------------------------------------------------------------------------

def _deviation_metrics(t: np.ndarray, theta: np.ndarray) -> tuple[float, float]:
    dev = np.abs(theta - theta[0])
    sup = float(dev.max())
    span = t[-1] - t[0]
    if span <= 0.0:
        return sup, sup
    tail = t >= t[-1] - 0.1 * span
    return sup, float(dev[tail].max())


def _nearest_equilibrium_angle(theta: float) -> float:
    return math.pi * round(theta / math.pi)


def _equilibrium_at(params: LoopParams, omega_e_free: float, theta_eq: float) -> Equilibrium:
    m = round(theta_eq / math.pi)
    kind = stable_equilibrium_kind(params) if m % 2 == 0 else EquilibriumKind.SADDLE
    return Equilibrium(
        x_eq=params.tau1 * omega_e_free / params.k_vco, theta_eq=math.pi * m, kind=kind
    )


# ---------------------------------------------------------------------------
# Integration
# ---------------------------------------------------------------------------

def integrate(
    params: LoopParams,
    omega_e_free: float,
    initial: State,
    opts: IntegratorOptions | None = None,
) -> Trajectory:
    """Integrate the physical system until lock or t_max.

    Lock is detected when the state, mapped to reduced coordinates, enters
    the convergence ball around the nearest equilibrium.
    """
    opts = opts or IntegratorOptions()
    scale = time_scale(params)
    t_end = (opts.t_max if opts.t_max is not None else _default_t_max(params)) / scale
    max_step = (opts.max_step if opts.max_step is not None else _DEFAULT_MAX_STEP) / scale
    k = params.k
    g = params.k_vco / params.tau1
    tau2 = params.tau2
    radius = opts.convergence_radius

    def field(t: float, s):
        ve = _pd_scalar(s[1], k)
        return (ve, omega_e_free - g * (s[0] + tau2 * ve))

    def reduced_distance(s) -> float:
        ve = _pd_scalar(s[1], k)
        y = omega_e_free / scale - scale * (s[0] + tau2 * ve)
        return math.hypot(s[1] - _nearest_equilibrium_angle(s[1]), y)

    def locked(t: float, s) -> float:
        return reduced_distance(s) - radius

    locked.terminal = True

    s0 = (initial.x, initial.theta_e)
    if reduced_distance(s0) <= radius:
        t = np.array([0.0])
        ys = np.array([s0])
        theta_eq = _nearest_equilibrium_angle(initial.theta_e)
        return Trajectory(
            t=t, ys=ys, coords="original", sup_deviation=0.0, limsup_deviation=0.0,
            converged=True, converged_theta=theta_eq,
            converged_to=_equilibrium_at(params, omega_e_free, theta_eq),
        )

    sol = solve_ivp(
        field, (0.0, t_end), s0, method="RK45",
        rtol=opts.rel_tol, atol=opts.abs_tol, max_step=max_step, events=[locked],
    )
    if sol.status < 0:
        raise NumericsError(f"integrator failed: {sol.message}")
    t = sol.t
    ys = sol.y.T
    converged = sol.status == 1
    sup, limsup = _deviation_metrics(t, ys[:, 1])
    converged_theta = None
    converged_to = None
    if converged:
        converged_theta = _nearest_equilibrium_angle(float(ys[-1, 1]))
        converged_to = _equilibrium_at(params, omega_e_free, converged_theta)
    return Trajectory(
        t=t, ys=ys, coords="original", sup_deviation=sup, limsup_deviation=limsup,
        converged=converged, converged_theta=converged_theta, converged_to=converged_to,
    )


def _reduced_field(params: LoopParams):
    coeffs = derived_coeffs(params)
    a = coeffs.a
    k = params.k

    def field(t: float, s):
        ve = _pd_scalar(s[1], k)
        vp = _pd_slope_scalar(s[1], k)
        return (-a * vp * s[0] - ve, s[0])

    return field


def integrate_reduced(
    params: LoopParams,
    initial: ReducedState,
    opts: IntegratorOptions | None = None,
) -> Trajectory:
    """Integrate the reduced system (state columns: y, theta_e)."""
    opts = opts or IntegratorOptions()
    t_end = opts.t_max if opts.t_max is not None else _default_t_max(params)
    max_step = opts.max_step if opts.max_step is not None else _DEFAULT_MAX_STEP
    radius = opts.convergence_radius

    def locked(t: float, s) -> float:
        return math.hypot(s[1] - _nearest_equilibrium_angle(s[1]), s[0]) - radius

    locked.terminal = True

    s0 = (initial.y, initial.theta_e)
    if locked(0.0, s0) <= 0.0:
        theta_eq = _nearest_equilibrium_angle(initial.theta_e)
        return Trajectory(
            t=np.array([0.0]), ys=np.array([s0]), coords="reduced",
            sup_deviation=0.0, limsup_deviation=0.0,
            converged=True, converged_theta=theta_eq, converged_to=None,
        )

    sol = solve_ivp(
        _reduced_field(params), (0.0, t_end), s0, method="RK45",
        rtol=opts.rel_tol, atol=opts.abs_tol, max_step=max_step, events=[locked],
    )
    if sol.status < 0:
        raise NumericsError(f"integrator failed: {sol.message}")
    t = sol.t
    ys = sol.y.T
    converged = sol.status == 1
    sup, limsup = _deviation_metrics(t, ys[:, 1])
    converged_theta = _nearest_equilibrium_angle(float(ys[-1, 1])) if converged else None
    return Trajectory(
        t=t, ys=ys, coords="reduced", sup_deviation=sup, limsup_deviation=limsup,
        converged=converged, converged_theta=converged_theta, converged_to=None,
    )


def simulate_step(
    params: LoopParams, scenario: StepScenario, opts: IntegratorOptions | None = None
) -> Trajectory:
    """Run a frequency-step experiment in physical coordinates."""
    return integrate(params, scenario.omega_after, scenario.initial_state(params), opts)


def detect_slip(traj: Trajectory) -> SlipFlags:
    """Classify a trajectory under the sup and trailing-window metrics.

    A deviation of 2*pi or more counts as a slip under either metric.  The
    trailing-window verdict is indeterminate (None) when the trajectory never
    settled, since the window then says nothing about the limit superior.
    """
    sup_slip = bool(traj.sup_deviation >= TWO_PI)
    if not traj.converged:
        return SlipFlags(
            slipped_sup=sup_slip,
            slipped_limsup=None,
            diagnostic="trajectory did not reach an equilibrium before t_max",
        )
    return SlipFlags(sup_slip, bool(traj.limsup_deviation >= TWO_PI))


# ---------------------------------------------------------------------------
# Lock-in boundary searches
# ---------------------------------------------------------------------------

def _step_scenario_slips(
    params: LoopParams, omega: float, theta0: float, opts: IntegratorOptions
) -> bool:
    """Does the step scenario at frequency step omega slip a cycle?

    Run in reduced coordinates (same phase trajectory, cheaper): the
    post-switch image of the before-switch equilibrium is
    (y, theta_e) = (2*omega*sqrt(tau1/k_vco), theta0).  Terminates as soon as
    either lock or a 2*pi deviation is certain.
    """
    y0 = 2.0 * omega / time_scale(params)
    radius = opts.convergence_radius

    def locked(t: float, s) -> float:
        return math.hypot(s[1] - _nearest_equilibrium_angle(s[1]), s[0]) - radius

    locked.terminal = True

    def slipped(t: float, s) -> float:
        return abs(s[1] - theta0) - TWO_PI

    slipped.terminal = True
    slipped.direction = 1

    s0 = (y0, theta0)
    if locked(0.0, s0) <= 0.0:
        return False

    field = _reduced_field(params)
    max_step = opts.max_step if opts.max_step is not None else _DEFAULT_MAX_STEP
    t_end = opts.t_max if opts.t_max is not None else _default_t_max(params)
    for _ in range(4):
        sol = solve_ivp(
            field, (0.0, t_end), s0, method="RK45",
            rtol=opts.rel_tol, atol=opts.abs_tol, max_step=max_step,
            events=[locked, slipped],
        )
        if sol.status < 0:
            raise NumericsError(f"integrator failed: {sol.message}")
        if sol.status == 1:
            return len(sol.t_events[1]) > 0
        t_end *= 4.0  # settled neither way; rare slow crawl near a saddle
    raise NumericsError(
        f"step scenario at omega={omega!r} settled neither to lock nor slip by t={t_end!r}"
    )


def _bisect_boundary(
    params: LoopParams, theta0: float, opts: IntegratorOptions | None, bisect_tol: float | None
) -> float:
    opts = opts or IntegratorOptions()
    base = gardner_estimate(params)
    if bisect_tol is None:
        bisect_tol = 1e-3 * base
    hi = 4.0 * base
    doublings = 0
    while not _step_scenario_slips(params, hi, theta0, opts):
        doublings += 1
        if doublings > 4:
            raise NumericsError(
                f"no cycle slip observed up to omega = {hi!r}; bracket expansion failed"
            )
        hi *= 2.0
    lo = 0.0
    while hi - lo > bisect_tol:
        mid = 0.5 * (lo + hi)
        if _step_scenario_slips(params, mid, theta0, opts):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def lock_in_numeric(
    params: LoopParams,
    opts: IntegratorOptions | None = None,
    bisect_tol: float | None = None,
) -> float:
    """Lock-in frequency measured by bisection on frequency-step experiments.

    Candidate steps -omega -> +omega start from the stable equilibrium of
    the before-switch system and are classified by the sup metric; the
    default tolerance is 0.1% of the rule-of-thumb estimate.
    """
    return _bisect_boundary(params, 0.0, opts, bisect_tol)


def conservative_lock_in_numeric(
    params: LoopParams,
    opts: IntegratorOptions | None = None,
    bisect_tol: float | None = None,
) -> float:
    """Conservative lock-in frequency: same search, but the scenario starts
    at the before-switch saddle (theta_e = -pi)."""
    return _bisect_boundary(params, -math.pi, opts, bisect_tol)


# ---------------------------------------------------------------------------
# Backward separatrix tracing
# ---------------------------------------------------------------------------

def _trace_separatrix(
    params: LoopParams, opts: IntegratorOptions | None, eps: float
):
    opts = opts or IntegratorOptions()
    coeffs = derived_coeffs(params)
    a, c, k = coeffs.a, coeffs.c, params.k
    fall_rate = 1.0 / (math.pi - 1.0 / k)
    slope_in = 0.5 * (a - c) * fall_rate  # stable eigenline slope at the saddle
    direction = np.array([1.0, slope_in])
    direction /= np.linalg.norm(direction)
    seed = np.array([math.pi, 0.0]) - eps * direction  # theta < pi, y > 0

    # Escaping the linear neighbourhood of the saddle takes ~log(1/eps) over
    # the stable rate; the rest of the sweep is fast.
    rate = 0.5 * (c - a) * fall_rate
    if opts.t_max is not None:
        t_end = opts.t_max
    else:
        t_end = (math.log(1.0 / eps) + 10.0) / rate + 100.0

    field = _reduced_field(params)

    def backward(t: float, s):
        dy, dtheta = field(t, (s[1], s[0]))  # note: state here is (theta, y)
        return (-dtheta, -dy)

    events = []
    for target in (1.0 / k, 0.0, -1.0 / k, -math.pi):
        def crossing(t, s, tg=target):
            return s[0] - tg

        crossing.direction = -1
        events.append(crossing)
    events[-1].terminal = True

    sol = solve_ivp(
        backward, (0.0, t_end), seed, method="RK45",
        rtol=opts.rel_tol, atol=opts.abs_tol,
        max_step=opts.max_step if opts.max_step is not None else _DEFAULT_MAX_STEP,
        events=events,
    )
    if sol.status < 0:
        raise NumericsError(f"separatrix trace failed: {sol.message}")
    if sol.status != 1:
        raise NumericsError(f"separatrix trace did not reach theta_e = -pi by t = {t_end!r}")
    return sol


def trace_separatrix_numeric(
    params: LoopParams, opts: IntegratorOptions | None = None, eps: float = 1e-8
) -> Trajectory:
    """Numeric upper separatrix by reversed-time integration from the saddle.

    The seed sits ``eps`` along the incoming eigenvector from (pi, 0); the
    trace runs until theta_e reaches -pi.  Returns a reduced-coordinate
    trajectory whose samples include the exact crossings of the landmark
    angles 1/k, 0, -1/k and -pi.
    """
    sol = _trace_separatrix(params, opts, eps)
    ts = [sol.t]
    rows = [sol.y.T]
    for te, ye in zip(sol.t_events, sol.y_events):
        if len(te):
            ts.append(te)
            rows.append(ye)
    t_all = np.concatenate(ts)
    states = np.concatenate(rows)  # columns (theta, y)
    order = np.argsort(t_all, kind="stable")
    t_all = t_all[order]
    states = states[order]
    ys = np.column_stack([states[:, 1], states[:, 0]])  # -> (y, theta)
    sup, limsup = _deviation_metrics(t_all, ys[:, 1])
    return Trajectory(
        t=t_all, ys=ys, coords="reduced", sup_deviation=sup, limsup_deviation=limsup,
        converged=False, converged_theta=None, converged_to=None,
    )


def separatrix_landmarks_numeric(
    params: LoopParams, opts: IntegratorOptions | None = None, eps: float = 1e-8
) -> dict[str, float]:
    """Numeric separatrix heights at the landmark angles.

    Keys: "pos_break" (theta = 1/k), "zero", "neg_break" (-1/k), "minus_pi".
    """
    sol = _trace_separatrix(params, opts, eps)
    names = ("pos_break", "zero", "neg_break", "minus_pi")
    out: dict[str, float] = {}
    for name, ye in zip(names, sol.y_events):
        if not len(ye):
            raise NumericsError(f"separatrix trace never crossed the {name} landmark")
        out[name] = float(ye[0][1])
    return out


# ---------------------------------------------------------------------------
# Energy audit
# ---------------------------------------------------------------------------

def lyapunov_audit(traj: Trajectory, params: LoopParams, omega_e_free: float) -> float:
    """Largest positive jump of the energy function between samples.

    The energy is nonincreasing along exact trajectories, so the audit value
    should sit at the integrator-tolerance scale; a stationary trajectory
    audits to exactly zero.
    """
    if traj.coords != "original":
        raise ValueError("lyapunov_audit needs a trajectory in original coordinates")
    values = lyapunov_values(traj.primary, traj.theta, params, omega_e_free)
    if len(values) < 2:
        return 0.0
    return float(max(0.0, np.max(np.diff(values))))
