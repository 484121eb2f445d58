"""Closed-form lock-in analysis of a reference loop.

Walks through the basic library workflow: build the loop, inspect its
dimensionless coefficients and equilibrium type, evaluate both lock-in
boundaries exactly, and compare them with the classic engineering estimates.

Run: python demos/01_lock_in_analysis.py
"""

import math

from pll_lockin import (
    LoopParams,
    derived_coeffs,
    equilibria,
    estimates,
    lock_in_ranges,
)

# A triangular-characteristic loop (k = 2/pi): tau1/tau2 set the filter,
# k_vco the VCO gain.
loop = LoopParams(tau1=0.0633, tau2=0.0225, k_vco=250.0, k=2.0 / math.pi)

coeffs = derived_coeffs(loop)
print("dimensionless coefficients")
print(f"  a = {coeffs.a:.6f}   b = {coeffs.b:.6f}   c = {coeffs.c:.6f}")
print(f"  a^2*k = {coeffs.a**2 * loop.k:.4f}  ->  stable equilibria are a {coeffs.case.value}")
print()

print("equilibria (frequency error 69 rad/s)")
for eq in equilibria(loop, 69.0, range(-1, 2)):
    print(f"  x = {eq.x_eq:+.6f}, theta_e = {eq.theta_eq:+.4f}: {eq.kind.value}")
print()

result = lock_in_ranges(loop)
print("exact boundaries")
print(f"  lock-in frequency              omega_l   = {result.omega_l:.4f} rad/s")
print(f"  conservative lock-in frequency omega_l_c = {result.omega_l_c:.4f} rad/s")
print(f"  (separatrix landmarks: y_l = {result.y_l:.6f}, d = {result.d:.6f}, "
      f"y_l_c = {result.y_l_c:.6f})")
print()

est = estimates(loop)
print("engineering estimates vs the exact omega_l")
rows = [
    ("rule of thumb k_vco*tau2/tau1", est.gardner),
    ("pull-out based", est.best_pull_out_based),
]
if est.huque_stensby_pull_out is not None:
    rows.append(("triangular pull-out formula / 2", 0.5 * est.huque_stensby_pull_out))
for name, value in rows:
    rel = (value - result.omega_l) / result.omega_l
    print(f"  {name:<34} {value:9.4f} rad/s  ({rel:+7.2%})")
print()

# The rule of thumb drifts from optimistic to pessimistic as the PD slope
# varies; the exact formula tracks the true boundary everywhere.
print("exact boundary and rule of thumb across PD slopes")
print(f"  {'k':>8} {'case':>16} {'omega_l':>10} {'rule-of-thumb':>14}")
for k in (0.35, 0.45, 2.0 / math.pi, 1.0, 1.8, 3.2):
    variant = LoopParams(loop.tau1, loop.tau2, loop.k_vco, k)
    r = lock_in_ranges(variant)
    e = estimates(variant)
    print(f"  {k:8.4f} {r.case.value:>16} {r.omega_l:10.4f} {e.gardner:14.4f}")
