"""Analytic reconstruction of the upper saddle separatrix of the reduced
system on [-pi, pi].

The phase plane splits into three strips where the vector field is linear:

* domain I   : 1/k <= theta_e <= pi   (falling PD segment, right of the saddle's basin)
* domain II  : -1/k <= theta_e <= 1/k (rising PD segment around the stable point)
* domain III : -pi <= theta_e <= -1/k (falling PD segment)

In domain I the separatrix coincides with the saddle's stable eigenline and
is an explicit linear function.  In domains II and III it is the level set
of a first integral; evaluating it means solving a scalar implicit equation
for y at each theta_e.  All implicit equations are strictly increasing in y
above the relevant eigenlines, so bracketed root finding is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._roots import solve_increasing
from .errors import NumericsError
from .lockin import SQRT_PI, solve_d, y_conservative, y_lock_in
from .model import DerivedCoeffs, LoopParams, StabilityCase, derived_coeffs

# Below this |theta_e| the domain-II implicit equations degenerate (their
# integration constant jumps across theta_e = 0 in the focus case); the
# closed-form limit y_l is used instead.
_THETA_EPS = 1e-8

# Offset added to the eigenline lower bracket before root finding.
_BRACKET_OFFSET = 1e-12

_DOMAIN_TOL = 1e-12


def _check_domain(theta_e: float, lo: float, hi: float, name: str) -> None:
    if not (lo - _DOMAIN_TOL <= theta_e <= hi + _DOMAIN_TOL):
        raise ValueError(f"theta_e = {theta_e!r} outside domain {name} = [{lo!r}, {hi!r}]")


def s_domain1(theta_e: float, coeffs: DerivedCoeffs, k: float) -> float:
    """Separatrix on [1/k, pi]: the stable eigenline into the saddle (pi, 0)."""
    _check_domain(theta_e, 1.0 / k, math.pi, "I")
    a, c = coeffs.a, coeffs.c
    return (c - a) / (2.0 * (math.pi - 1.0 / k)) * (math.pi - theta_e)


def _domain2_residual(coeffs: DerivedCoeffs, k: float, theta_e: float):
    """Residual f(y) and derivative for the domain-II level-set equation.

    Returns (f, df, lower) where f is strictly increasing on y > lower and
    the separatrix value is its unique zero.
    """
    a, b, c = coeffs.a, coeffs.b, coeffs.c

    if coeffs.case is StabilityCase.NODE:
        const = math.log(math.pi) + a / b * (math.log1p(b / c) - math.log1p(-b / c))
        lower = max(0.0, -0.5 * (a + b) * k * theta_e, -0.5 * (a - b) * k * theta_e)

        def f(y: float) -> float:
            p1 = y + 0.5 * (a - b) * k * theta_e
            q = y * y + a * k * y * theta_e + k * theta_e * theta_e
            return math.log(q) + a / b * math.log1p(b * k * theta_e / p1) - const

    elif coeffs.case is StabilityCase.FOCUS:
        const = math.log(math.pi) - 2.0 * a / b * math.atan(c / b)
        if theta_e < 0.0:
            const += 2.0 * math.pi * a / b
        lower = 0.0

        def f(y: float) -> float:
            q = y * y + a * k * y * theta_e + k * theta_e * theta_e
            arg = (a * theta_e + 2.0 * y / k) / (b * theta_e)
            return math.log(q) - 2.0 * a / b * math.atan(arg) - const

    else:  # DEGENERATE_NODE, handled on u = 2*theta + a*y
        const = a / (2.0 * SQRT_PI) + math.log(a * SQRT_PI)
        lower = max(0.0, -2.0 * theta_e / a)

        def f(y: float) -> float:
            u = 2.0 * theta_e + a * y
            return 2.0 * theta_e / u + math.log(u) - const

        def df(y: float) -> float:
            u = 2.0 * theta_e + a * y
            return a * (u - 2.0 * theta_e) / (u * u)

        return f, df, lower

    def df(y: float) -> float:
        return 2.0 * y / (y * y + a * k * y * theta_e + k * theta_e * theta_e)

    return f, df, lower


def s_domain2(
    theta_e: float, coeffs: DerivedCoeffs, k: float, y_hint: float | None = None
) -> float:
    """Separatrix on [-1/k, 1/k], solved from the case-matched level set.

    ``y_hint`` seeds the upper bracket (typically the neighbouring sample).
    """
    _check_domain(theta_e, -1.0 / k, 1.0 / k, "II")
    if abs(theta_e) < _THETA_EPS:
        return y_lock_in(coeffs, k)
    f, df, lower = _domain2_residual(coeffs, k, theta_e)
    lo = lower + _BRACKET_OFFSET
    hi = max(y_hint if y_hint is not None else 0.0, lo + 1.0)
    return solve_increasing(
        f, lo, hi, df, bisect_tol=1e-9, residual_tol=1e-13,
        context=f"(separatrix domain II, theta_e={theta_e!r}, case {coeffs.case.value})",
    )


def s_domain3(
    theta_e: float,
    coeffs: DerivedCoeffs,
    k: float,
    d: float,
    y_hint: float | None = None,
) -> float:
    """Separatrix on [-pi, -1/k], continued from d = S(-1/k)."""
    _check_domain(theta_e, -math.pi, -1.0 / k, "III")
    a, c = coeffs.a, coeffs.c
    psi = math.pi + theta_e
    if psi < _THETA_EPS:
        return y_conservative(coeffs, d)
    fall = math.pi - 1.0 / k
    slope_lo = 0.5 * (c - a) / fall
    slope_hi = 0.5 * (c + a) / fall
    wa = (c - a) / c
    wb = (c + a) / c
    const = wa * math.log(d + 0.5 * (c - a)) + wb * math.log(d - 0.5 * (c + a))

    def f(y: float) -> float:
        return wa * math.log(y + slope_lo * psi) + wb * math.log(y - slope_hi * psi) - const

    def df(y: float) -> float:
        return wa / (y + slope_lo * psi) + wb / (y - slope_hi * psi)

    lo = slope_hi * psi + _BRACKET_OFFSET
    hi = max(y_hint if y_hint is not None else 0.0, lo + 1.0)
    return solve_increasing(
        f, lo, hi, df, bisect_tol=1e-9, residual_tol=1e-13,
        context=f"(separatrix domain III, theta_e={theta_e!r})",
    )


def implicit_residual(
    theta_e: float,
    y: float,
    coeffs: DerivedCoeffs,
    k: float,
    d: float | None = None,
) -> float:
    """Residual of the domain-matched separatrix equation at (theta_e, y).

    Zero (to solver tolerance) exactly on the separatrix.  Domains II and III
    use the logarithmic form of their level-set equations, domain I the
    explicit linear formula, so all residuals are O(1)-scaled.
    """
    if theta_e > 1.0 / k:
        return y - s_domain1(theta_e, coeffs, k)
    if theta_e >= -1.0 / k:
        if abs(theta_e) < _THETA_EPS:
            return y - y_lock_in(coeffs, k)
        f, _, _ = _domain2_residual(coeffs, k, theta_e)
        return f(y)
    if d is None:
        d = solve_d(coeffs, k)
    a, c = coeffs.a, coeffs.c
    psi = math.pi + theta_e
    if psi < _THETA_EPS:
        return y - y_conservative(coeffs, d)
    fall = math.pi - 1.0 / k
    wa = (c - a) / c
    wb = (c + a) / c
    const = wa * math.log(d + 0.5 * (c - a)) + wb * math.log(d - 0.5 * (c + a))
    return wa * math.log(y + 0.5 * (c - a) / fall * psi) + wb * math.log(
        y - 0.5 * (c + a) / fall * psi
    ) - const


@dataclass(frozen=True)
class SeparatrixLandmarks:
    """The four separatrix values that determine the lock-in ranges."""

    s_at_pos_break: float  # S(1/k) = (c - a)/2
    y_l: float             # S(0)
    d: float               # S(-1/k)
    y_l_c: float           # S(-pi)


@dataclass(frozen=True)
class SeparatrixCurve:
    """Sampled analytic separatrix, ordered by strictly decreasing theta_e
    (the direction the curve is integrated: from the saddle at pi down to
    -pi)."""

    theta: np.ndarray
    y: np.ndarray
    domain: tuple[str, ...]
    landmarks: SeparatrixLandmarks
    case: StabilityCase


def _cos_spaced(lo: float, hi: float, n: int) -> np.ndarray:
    """n nodes on [lo, hi] clustered toward both endpoints."""
    u = np.cos(np.linspace(math.pi, 0.0, n))  # -1 .. 1
    return 0.5 * (lo + hi) + 0.5 * (hi - lo) * u


def build_curve(params: LoopParams, n_samples: int = 256) -> SeparatrixCurve:
    """Assemble the piecewise separatrix on [-pi, pi].

    Samples cluster near the domain boundaries and theta_e = 0 where the
    curve bends fastest; the landmark angles pi, 1/k, 0, -1/k, -pi are
    always included exactly.
    """
    if n_samples < 16:
        raise ValueError(f"n_samples must be at least 16, got {n_samples}")
    coeffs = derived_coeffs(params)
    k = params.k
    a, c = coeffs.a, coeffs.c
    d = solve_d(coeffs, k)
    y_l = y_lock_in(coeffs, k)
    y_l_c = y_conservative(coeffs, d)
    brk = 1.0 / k

    # Segment lengths, walked in decreasing theta: I, II+, II-, III.
    segs = [
        (math.pi, brk, "I"),
        (brk, 0.0, "II"),
        (0.0, -brk, "II"),
        (-brk, -math.pi, "III"),
    ]
    # Three segment endpoints are shared, so allocate n_samples + 3 nodes.
    target = n_samples + 3
    lengths = np.array([hi - lo for hi, lo, _ in segs])
    counts = np.maximum(4, np.round(target * lengths / lengths.sum()).astype(int))
    counts[np.argmax(counts)] += target - counts.sum()

    exact = {
        math.pi: 0.0,
        brk: 0.5 * (c - a),
        0.0: y_l,
        -brk: d,
        -math.pi: y_l_c,
    }

    thetas: list[float] = []
    values: list[float] = []
    domains: list[str] = []
    prev_y: float | None = None
    for (hi, lo, name), n in zip(segs, counts):
        nodes = _cos_spaced(lo, hi, int(n))[::-1]  # decreasing theta
        for i, th in enumerate(nodes):
            if thetas and i == 0:
                continue  # shared endpoint already emitted
            th = float(th)
            if th in exact:
                y = exact[th]
            elif name == "I":
                y = s_domain1(th, coeffs, k)
            elif name == "II":
                y = s_domain2(th, coeffs, k, y_hint=prev_y)
            else:
                y = s_domain3(th, coeffs, k, d, y_hint=prev_y)
            thetas.append(th)
            values.append(y)
            domains.append(name)
            prev_y = y

    theta_arr = np.array(thetas)
    y_arr = np.array(values)
    if np.any(np.diff(theta_arr) >= 0.0):
        raise NumericsError("separatrix sampling produced a non-monotone theta grid")
    return SeparatrixCurve(
        theta=theta_arr,
        y=y_arr,
        domain=tuple(domains),
        landmarks=SeparatrixLandmarks(
            s_at_pos_break=0.5 * (c - a), y_l=y_l, d=d, y_l_c=y_l_c
        ),
        case=coeffs.case,
    )
