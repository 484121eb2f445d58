"""Bracketed scalar root finding for strictly increasing residual functions.

All transcendental equations in this package reduce to a strictly increasing
residual f(x) on an interval (lower, inf) with f -> -inf at the lower end, so
a geometric bracket expansion followed by bisection and a Newton polish is
guaranteed to converge once the bracket contains the root.
"""

from __future__ import annotations

from typing import Callable

from .errors import NumericsError


def solve_increasing(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    df: Callable[[float], float] | None = None,
    *,
    bisect_tol: float = 1e-6,
    residual_tol: float = 1e-12,
    max_expand: int = 200,
    context: str = "",
) -> float:
    """Root of a strictly increasing f with f(lo) < 0.

    The upper end is grown geometrically from ``hi`` until f changes sign,
    then the bracket is bisected to ``bisect_tol`` and polished with Newton
    steps (clipped to the bracket) until |f| <= residual_tol.
    """
    flo = f(lo)
    if flo > 0.0:
        raise NumericsError(f"root bracket lost: f({lo!r}) = {flo!r} > 0 {context}")
    span = max(hi - lo, 1e-300)
    fhi = f(hi)
    expansions = 0
    while fhi < 0.0:
        expansions += 1
        if expansions > max_expand:
            raise NumericsError(f"bracket expansion failed after {max_expand} doublings {context}")
        span *= 2.0
        hi = lo + span
        fhi = f(hi)
    if fhi == 0.0:
        return hi

    while hi - lo > bisect_tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid

    x = 0.5 * (lo + hi)
    fx = f(x)
    for _ in range(80):
        if abs(fx) <= residual_tol:
            return x
        slope = df(x) if df is not None else None
        if slope is None or slope <= 0.0:
            # fall back to a bisection step on the maintained bracket
            if fx < 0.0:
                lo = x
            else:
                hi = x
            x_new = 0.5 * (lo + hi)
        else:
            x_new = x - fx / slope
            if not (lo < x_new < hi):
                if fx < 0.0:
                    lo = x
                else:
                    hi = x
                x_new = 0.5 * (lo + hi)
            elif fx < 0.0:
                lo = x
            else:
                hi = x
        if x_new == x:
            return x
        x = x_new
        fx = f(x)
    if abs(fx) <= 1e3 * residual_tol:
        return x
    raise NumericsError(f"Newton polish stalled at residual {fx!r} {context}")
