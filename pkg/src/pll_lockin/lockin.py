"""Closed-form lock-in and conservative lock-in frequencies.

The lock-in frequency ``omega_l`` and its conservative companion
``omega_l_c`` are obtained from landmark values of the saddle separatrix of
the reduced system: ``omega_l = a/(2*tau2) * y_l`` with ``y_l = S(0)`` and
``omega_l_c = a/(2*tau2) * y_l_c`` with ``y_l_c = S(-pi)``.  Both landmarks
admit closed forms once the auxiliary root ``d = S(-1/k)`` is known; ``d``
solves a case-matched transcendental equation (explicitly via the Lambert W
function in the degenerate-node case).

Three published engineering estimates are provided for comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._roots import solve_increasing
from .errors import ApplicabilityError, NumericsError
from .model import DerivedCoeffs, LoopParams, StabilityCase, derived_coeffs

SQRT_PI = math.sqrt(math.pi)


# ---------------------------------------------------------------------------
# Lambert W, principal branch on positive arguments
# ---------------------------------------------------------------------------

def lambert_w0(x: float) -> float:
    """Principal-branch Lambert W for x > 0: the w > 0 with w*exp(w) = x.

    Halley iterations from the initial guess log(1 + x); converges to
    machine precision in a handful of steps for all positive x.
    """
    if not (isinstance(x, (int, float)) and x > 0.0 and math.isfinite(x)):
        raise ValueError(f"lambert_w0 requires a positive finite argument, got {x!r}")
    w = math.log1p(x)
    for _ in range(60):
        ew = math.exp(w)
        f = w * ew - x
        dw = f / (ew * (w + 1.0) - (w + 2.0) * f / (2.0 * (w + 1.0)))
        w -= dw
        if abs(dw) <= 1e-15 * (1.0 + abs(w)):
            return w
    raise NumericsError(f"lambert_w0 did not converge for x = {x!r}")


# ---------------------------------------------------------------------------
# Separatrix landmarks in dimensionless form
# ---------------------------------------------------------------------------

def y_lock_in(coeffs: DerivedCoeffs, k: float) -> float:
    """The separatrix height above the stable equilibrium, y_l = S(0)."""
    a, b, c = coeffs.a, coeffs.b, coeffs.c
    if coeffs.case is StabilityCase.NODE:
        # sqrt(pi) * ((c+b)/(c-b))^(a/(2b)), written via log1p for stability
        # as b -> 0.
        return SQRT_PI * math.exp(a / (2.0 * b) * (math.log1p(b / c) - math.log1p(-b / c)))
    if coeffs.case is StabilityCase.DEGENERATE_NODE:
        return SQRT_PI * math.exp(a / (2.0 * SQRT_PI))
    return SQRT_PI * math.exp(a / b * math.atan(b / c))


def solve_d(coeffs: DerivedCoeffs, k: float) -> float:
    """The separatrix value d = S(-1/k), the unique root of the case-matched
    transcendental equation.

    The residuals below are the logarithms of the defining equations, which
    are strictly increasing in d on the admissible interval, so bracketing
    plus a Newton polish cannot miss the root.
    """
    a, b, c = coeffs.a, coeffs.b, coeffs.c

    if coeffs.case is StabilityCase.DEGENERATE_NODE:
        u = a / (2.0 * SQRT_PI)
        return 0.5 * a * (1.0 + 1.0 / lambert_w0(u * math.exp(-u)))

    if coeffs.case is StabilityCase.NODE:
        lower = 0.5 * (a + b)
        rhs = math.log(math.pi) + a / b * (math.log1p(b / c) - math.log1p(-b / c))

        def f(d: float) -> float:
            return (
                math.log(d * d - a * d + 1.0 / k)
                + a / b * math.log1p(-b / (d - 0.5 * (a - b)))
                - rhs
            )

        def df(d: float) -> float:
            return 2.0 * d / ((d - 0.5 * (a - b)) * (d - 0.5 * (a + b)))

    else:  # FOCUS
        lower = 0.5 * a
        rhs = math.log(math.pi) + 2.0 * a / b * math.atan(b / c)

        def f(d: float) -> float:
            return (
                math.log(d * d - a * d + 1.0 / k)
                + 2.0 * a / b * math.atan(b / (a - 2.0 * d))
                - rhs
            )

        def df(d: float) -> float:
            q = d * d - a * d + 1.0 / k
            return (2.0 * d - a) / q + 4.0 * a / ((a - 2.0 * d) ** 2 + b * b)

    return solve_increasing(
        f,
        lower + 1e-9,
        lower + 1.0,
        df,
        bisect_tol=1e-6,
        residual_tol=1e-12,
        context=f"(root d, case {coeffs.case.value})",
    )


def y_conservative(coeffs: DerivedCoeffs, d: float) -> float:
    """The separatrix height at the opposite saddle, y_l_c = S(-pi)."""
    a, c = coeffs.a, coeffs.c
    p = d + 0.5 * (c - a)
    q = d - 0.5 * (c + a)
    if q <= 0.0:
        raise NumericsError(
            f"root d = {d!r} does not clear the saddle eigenline (c+a)/2 = {0.5 * (c + a)!r}"
        )
    return math.exp((c - a) / (2.0 * c) * math.log(p) + (c + a) / (2.0 * c) * math.log(q))


# ---------------------------------------------------------------------------
# Lock-in frequencies
# ---------------------------------------------------------------------------

def lock_in_frequency(params: LoopParams) -> tuple[float, float, StabilityCase]:
    """Exact lock-in frequency.

    Returns (omega_l in rad/s, the dimensionless y_l, the stability case).
    """
    coeffs = derived_coeffs(params)
    y_l = y_lock_in(coeffs, params.k)
    return coeffs.a / (2.0 * params.tau2) * y_l, y_l, coeffs.case


def conservative_lock_in(params: LoopParams) -> tuple[float, float, float]:
    """Exact conservative lock-in frequency.

    Returns (omega_l_c in rad/s, the auxiliary root d, the dimensionless
    y_l_c).  The conservative range is a strict subset of the lock-in range.
    """
    coeffs = derived_coeffs(params)
    d = solve_d(coeffs, params.k)
    y_l_c = y_conservative(coeffs, d)
    omega = 0.5 * math.sqrt(params.k_vco / params.tau1) * y_l_c
    return omega, d, y_l_c


@dataclass(frozen=True)
class LockInResult:
    """Both lock-in frequencies with their dimensionless landmarks."""

    omega_l: float
    omega_l_c: float
    case: StabilityCase
    d: float
    y_l: float
    y_l_c: float


def lock_in_ranges(params: LoopParams) -> LockInResult:
    """Evaluate both boundaries at once."""
    omega_l, y_l, case = lock_in_frequency(params)
    omega_l_c, d, y_l_c = conservative_lock_in(params)
    return LockInResult(
        omega_l=omega_l, omega_l_c=omega_l_c, case=case, d=d, y_l=y_l, y_l_c=y_l_c
    )


# ---------------------------------------------------------------------------
# Published engineering estimates
# ---------------------------------------------------------------------------

def gardner_estimate(params: LoopParams) -> float:
    """Textbook rule of thumb omega_l ~ k_vco * tau2 / tau1."""
    return params.k_vco * params.tau2 / params.tau1


def best_estimate(params: LoopParams) -> float:
    """Pull-out-based textbook estimate for the lock-in frequency."""
    return 0.7995 * math.sqrt(2.0 * params.k_vco / (math.pi * params.tau1)) + 1.23 * (
        params.tau2 * params.k_vco / (math.pi * params.tau1)
    )


def huque_stensby_pull_out(params: LoopParams) -> float:
    """Pull-out frequency formula for the triangular characteristic (k = 2/pi).

    Only valid for a^2 < 2*pi; for type 2 loops the pull-out frequency is
    twice the lock-in frequency, so this reproduces 2*omega_l on its
    validity region.
    """
    k_triangular = 2.0 / math.pi
    if abs(params.k - k_triangular) > 1e-12 * k_triangular:
        raise ApplicabilityError(
            f"pull-out formula requires the triangular characteristic k = 2/pi, got k = {params.k!r}"
        )
    a = derived_coeffs(params).a
    a_sq = a * a
    if a_sq >= 2.0 * math.pi:
        raise ApplicabilityError(
            f"pull-out formula requires a^2 < 2*pi, got a^2 = {a_sq!r}"
        )
    a_prime = math.pi / (2.0 * a_sq)
    m_minus = 0.5 * (1.0 - math.sqrt(4.0 * a_prime + 1.0))
    root = math.sqrt(4.0 * a_prime - 1.0)
    exponent = (
        0.5 * math.log(abs(m_minus * m_minus - m_minus + a_prime))
        - math.atan((1.0 - 2.0 * m_minus) / root) / root
        + math.pi / (2.0 * root)
    )
    return a_sq / params.tau2 * math.exp(exponent)


@dataclass(frozen=True)
class EstimateSet:
    """The comparison estimates; the pull-out formula only where applicable."""

    gardner: float
    best_pull_out_based: float
    huque_stensby_pull_out: float | None


def estimates(params: LoopParams) -> EstimateSet:
    try:
        huque = huque_stensby_pull_out(params)
    except ApplicabilityError:
        huque = None
    return EstimateSet(
        gardner=gardner_estimate(params),
        best_pull_out_based=best_estimate(params),
        huque_stensby_pull_out=huque,
    )
