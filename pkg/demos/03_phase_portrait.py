"""Phase portrait of the reduced system with the analytic separatrix.

Builds the same three ingredients the `pll-lockin portrait` subcommand
exports: a grid of short trajectories, the analytic saddle separatrix, and
the two landmark points whose heights encode the lock-in boundaries.  Saves
a PNG next to this script.

Run: python demos/03_phase_portrait.py
"""

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from scipy.integrate import solve_ivp

from pll_lockin import (
    LoopParams,
    ReducedState,
    build_curve,
    derived_coeffs,
    lock_in_ranges,
    reduced_rhs,
)

loop = LoopParams(tau1=0.0633, tau2=0.0225, k_vco=250.0, k=2.0 / math.pi)
coeffs = derived_coeffs(loop)
result = lock_in_ranges(loop)
curve = build_curve(loop, 512)

fig, ax = plt.subplots(figsize=(8.0, 5.0))

# short trajectories of the reduced flow
def field(t, s):
    return reduced_rhs(ReducedState(y=s[0], theta_e=s[1]), coeffs, loop.k)

y_max = 1.4 * curve.landmarks.d
for theta0 in np.linspace(-math.pi, math.pi, 9):
    for y0 in np.linspace(-y_max, y_max, 9):
        sol = solve_ivp(field, (0.0, 2.5), (y0, theta0), rtol=1e-8, atol=1e-10,
                        t_eval=np.linspace(0.0, 2.5, 60))
        ax.plot(sol.y[1], sol.y[0], color="0.75", lw=0.5, zorder=1)

# the upper separatrix and its mirror image (the flow is symmetric under
# (theta, y) -> (-theta, -y))
ax.plot(curve.theta, curve.y, color="tab:blue", lw=1.8, zorder=3, label="saddle separatrix")
ax.plot(-curve.theta, -curve.y, color="tab:blue", lw=1.8, zorder=3)

ax.plot([0.0], [curve.landmarks.y_l], "o", color="tab:red", zorder=4,
        label=f"lock-in landmark y_l = {curve.landmarks.y_l:.3f}")
ax.plot([-math.pi], [curve.landmarks.y_l_c], "s", color="tab:green", zorder=4,
        label=f"conservative landmark y_l_c = {curve.landmarks.y_l_c:.3f}")
ax.plot([0.0, math.pi, -math.pi], [0.0, 0.0, 0.0], "k.", ms=8, zorder=4)

ax.set_xlim(-math.pi * 1.05, math.pi * 1.05)
ax.set_ylim(-y_max, y_max)
ax.set_xlabel("phase error theta_e, rad")
ax.set_ylabel("reduced frequency variable y")
ax.set_title(
    f"reduced phase plane: omega_l = {result.omega_l:.2f}, "
    f"omega_l_c = {result.omega_l_c:.2f} rad/s"
)
ax.legend(loc="lower left", fontsize=8)

target = Path(__file__).with_suffix(".png")
fig.tight_layout()
fig.savefig(target, dpi=130)
print(f"wrote {target}")
print(f"separatrix samples: {len(curve.theta)}, case: {curve.case.value}")
print(f"landmark heights: y_l = {curve.landmarks.y_l:.6f} at theta = 0, "
      f"y_l_c = {curve.landmarks.y_l_c:.6f} at theta = -pi")
print("the boundaries in physical units are a/(2*tau2) times the landmark heights:")
print(f"  a/(2*tau2) * y_l   = {coeffs.a / (2 * loop.tau2) * curve.landmarks.y_l:.4f} rad/s")
print(f"  a/(2*tau2) * y_l_c = {coeffs.a / (2 * loop.tau2) * curve.landmarks.y_l_c:.4f} rad/s")
