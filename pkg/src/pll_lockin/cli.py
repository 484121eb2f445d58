"""Command-line front end.

Subcommands
-----------
analyze   closed-form ranges, equilibrium classification, estimate comparison
simulate  one trajectory (frequency-step or free initial condition)
portrait  phase-portrait dataset: short trajectories + analytic separatrix + landmarks
sweep     closed-form ranges and estimates over parameter grids
verify    oracle-equivalence battery (formulas vs simulation), nonzero exit on failure

Options can come from flags or from a ``--config`` file of flat ``key = value``
lines (flags win).  Exit codes: 0 success, 1 numeric failure, 2 usage or
validation error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ApplicabilityError, LoopParameterError, NumericsError
from .lockin import estimates, lock_in_ranges
from .model import (
    LoopParams,
    StabilityCase,
    derived_coeffs,
    equilibria,
    lyapunov_values,
    pd_characteristic,
    sample_loop_params,
    time_scale,
)
from .separatrix import build_curve
from .simulate import (
    IntegratorOptions,
    State,
    StepScenario,
    conservative_lock_in_numeric,
    integrate,
    lock_in_numeric,
    lyapunov_audit,
    separatrix_landmarks_numeric,
    simulate_step,
)

EXIT_OK = 0
EXIT_NUMERIC = 1
EXIT_USAGE = 2


# ---------------------------------------------------------------------------
# Config handling
# ---------------------------------------------------------------------------

def _read_config(path: str) -> dict[str, str]:
    """Flat ``key = value`` file; blank lines and '#' comments ignored."""
    cfg: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        key, sep, value = text.partition("=")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        cfg[key.strip()] = value.strip()
    return cfg


def _opt(args: argparse.Namespace, cfg: dict[str, str], name: str, conv, default=None):
    value = getattr(args, name, None)
    if value is not None:
        return value
    raw = cfg.get(name)
    if raw is not None:
        return conv(raw)
    return default


def _require(value, flag: str):
    if value is None:
        raise LoopParameterError(f"missing required option {flag}")
    return value


def _loop_params(args: argparse.Namespace, cfg: dict[str, str]) -> LoopParams:
    return LoopParams(
        tau1=_require(_opt(args, cfg, "tau1", float), "--tau1"),
        tau2=_require(_opt(args, cfg, "tau2", float), "--tau2"),
        k_vco=_require(_opt(args, cfg, "kvco", float), "--kvco"),
        k=_require(_opt(args, cfg, "k", float), "--k"),
    )


def _parse_grid(spec: str, flag: str) -> np.ndarray:
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"{flag} expects 'lo:hi:n', got {spec!r}")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 1:
        raise ValueError(f"{flag}: grid needs at least one point")
    if n == 1:
        return np.array([lo])
    if not hi > lo:
        raise ValueError(f"{flag}: grid must be strictly increasing, got {spec!r}")
    return np.linspace(lo, hi, n)


# ---------------------------------------------------------------------------
# Output formatting
# ---------------------------------------------------------------------------

def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _emit(out: str | None, fmt: str, header: list[str], rows: list[list]) -> None:
    if fmt == "json":
        records = [
            {key: value for key, value in zip(header, row)} for row in rows
        ]
        text = json.dumps(records, indent=2) + "\n"
    else:
        lines = [",".join(header)]
        lines.extend(",".join(_cell(v) for v in row) for row in rows)
        text = "\n".join(lines) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_object(out: str | None, fmt: str, obj: dict) -> None:
    if fmt == "json":
        text = json.dumps(obj, indent=2) + "\n"
    else:
        lines = [",".join(obj.keys()), ",".join(_cell(v) for v in obj.values())]
        text = "\n".join(lines) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_analyze(args: argparse.Namespace, cfg: dict[str, str]) -> int:
    params = _loop_params(args, cfg)
    omega = _opt(args, cfg, "omega", float, 0.0)
    out = _opt(args, cfg, "out", str)
    fmt = _opt(args, cfg, "format", str, "csv")

    coeffs = derived_coeffs(params)
    result = lock_in_ranges(params)
    est = estimates(params)
    eqs = equilibria(params, omega, range(0, 2))

    print(f"loop: tau1={params.tau1:g} s, tau2={params.tau2:g} s, "
          f"k_vco={params.k_vco:g} rad/(s*V), k={params.k:.6g}")
    print(f"dimensionless: a={coeffs.a:.6g}, b={coeffs.b:.6g}, c={coeffs.c:.6g}, "
          f"a^2*k={coeffs.a**2 * params.k:.6g} -> case {coeffs.case.value}")
    for eq in eqs:
        print(f"equilibrium (x={eq.x_eq:.6g}, theta_e={eq.theta_eq:.6g}): {eq.kind.value}")
    print()
    print(f"lock-in frequency              omega_l   = {result.omega_l:.6f} rad/s")
    print(f"conservative lock-in frequency omega_l_c = {result.omega_l_c:.6f} rad/s")
    print(f"separatrix landmarks: y_l={result.y_l:.8g}, d={result.d:.8g}, y_l_c={result.y_l_c:.8g}")
    print()
    print("estimate comparison (vs exact omega_l):")

    def _row(name: str, value: float | None) -> None:
        if value is None:
            print(f"  {name:<28} not applicable (needs k = 2/pi and a^2 < 2*pi)")
        else:
            rel = (value - result.omega_l) / result.omega_l
            print(f"  {name:<28} {value:10.4f} rad/s  ({rel:+.2%})")

    _row("rule-of-thumb (tau ratio)", est.gardner)
    _row("pull-out based", est.best_pull_out_based)
    _row("triangular pull-out / 2",
         None if est.huque_stensby_pull_out is None else 0.5 * est.huque_stensby_pull_out)

    if out:
        _emit_object(out, fmt, {
            "tau1": params.tau1,
            "tau2": params.tau2,
            "k_vco": params.k_vco,
            "k": params.k,
            "a": coeffs.a,
            "b": coeffs.b,
            "c": coeffs.c,
            "case": coeffs.case.value,
            "stable_kind": eqs[0].kind.value,
            "omega_l": result.omega_l,
            "omega_l_c": result.omega_l_c,
            "d": result.d,
            "y_l": result.y_l,
            "y_l_c": result.y_l_c,
            "gardner": est.gardner,
            "best_pull_out_based": est.best_pull_out_based,
            "huque_stensby_pull_out": est.huque_stensby_pull_out,
        })
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace, cfg: dict[str, str]) -> int:
    params = _loop_params(args, cfg)
    omega = _require(_opt(args, cfg, "omega", float), "--omega")
    scenario_name = _opt(args, cfg, "scenario", str, "step")
    out = _opt(args, cfg, "out", str)
    fmt = _opt(args, cfg, "format", str, "csv")
    t_max = _opt(args, cfg, "t_max", float)
    opts = IntegratorOptions(t_max=t_max) if t_max is not None else IntegratorOptions()

    if scenario_name in ("step", "saddle-step"):
        start = "stable" if scenario_name == "step" else "saddle"
        traj = simulate_step(
            params, StepScenario(omega_before=-omega, omega_after=omega, start_at=start), opts
        )
    elif scenario_name == "free":
        x0 = _require(_opt(args, cfg, "x0", float), "--x0")
        theta0 = _require(_opt(args, cfg, "theta0", float), "--theta0")
        traj = integrate(params, omega, State(x=x0, theta_e=theta0), opts)
    else:
        raise ValueError(f"unknown scenario {scenario_name!r} (step, saddle-step, free)")

    scale = time_scale(params)
    x = traj.primary
    theta = traj.theta
    y = omega / scale - scale * (x + params.tau2 * pd_characteristic(theta, params.k))
    v = lyapunov_values(x, theta, params, omega)
    sup_dev = np.maximum.accumulate(np.abs(theta - theta[0]))

    header = ["t", "x", "theta_e", "y", "V", "sup_dev"]
    rows = [
        [float(traj.t[i]), float(x[i]), float(theta[i]), float(y[i]), float(v[i]), float(sup_dev[i])]
        for i in range(len(traj.t))
    ]
    _emit(out, fmt, header, rows)
    print(
        f"# converged={traj.converged} sup_deviation={traj.sup_deviation:.6g} "
        f"limsup_deviation={traj.limsup_deviation:.6g}",
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_portrait(args: argparse.Namespace, cfg: dict[str, str]) -> int:
    params = _loop_params(args, cfg)
    out = _opt(args, cfg, "out", str)
    fmt = _opt(args, cfg, "format", str, "csv")
    grid_n = _opt(args, cfg, "grid_n", int, 9)
    t_span = _opt(args, cfg, "t_span", float, 3.0)
    n_samples = _opt(args, cfg, "n_samples", int, 256)
    y_max = _opt(args, cfg, "y_max", float)

    curve = build_curve(params, n_samples)
    if y_max is None:
        y_max = 1.5 * curve.landmarks.d
    coeffs = derived_coeffs(params)
    k = params.k
    a = coeffs.a

    from .model import _pd_scalar, _pd_slope_scalar  # scalar hot path

    def field(t, s):
        ve = _pd_scalar(s[1], k)
        vp = _pd_slope_scalar(s[1], k)
        return (-a * vp * s[0] - ve, s[0])

    header = ["kind", "series", "theta_e", "y"]
    rows: list[list] = []

    t_eval = np.linspace(0.0, t_span, 33)
    index = 0
    for theta0 in np.linspace(-math.pi, math.pi, grid_n):
        for y0 in np.linspace(-y_max, y_max, grid_n):
            sol = solve_ivp(
                field, (0.0, t_span), (float(y0), float(theta0)),
                method="RK45", rtol=1e-9, atol=1e-12, t_eval=t_eval,
            )
            if sol.status < 0:
                raise NumericsError(f"portrait trajectory failed: {sol.message}")
            name = f"traj-{index:03d}"
            for theta, y in zip(sol.y[1], sol.y[0]):
                rows.append(["trajectory", name, float(theta), float(y)])
            index += 1

    for theta, y, domain in zip(curve.theta, curve.y, curve.domain):
        rows.append(["separatrix", domain, float(theta), float(y)])

    rows.append(["landmark", "lock_in", 0.0, curve.landmarks.y_l])
    rows.append(["landmark", "conservative", -math.pi, curve.landmarks.y_l_c])

    _emit(out, fmt, header, rows)
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace, cfg: dict[str, str]) -> int:
    out = _opt(args, cfg, "out", str)
    fmt = _opt(args, cfg, "format", str, "csv")

    grids: dict[str, np.ndarray] = {}
    for name, flag in (("tau1", "--sweep-tau1"), ("tau2", "--sweep-tau2"),
                       ("kvco", "--sweep-kvco"), ("k", "--sweep-k")):
        spec = _opt(args, cfg, f"sweep_{name}", str)
        if spec is not None:
            grids[name] = _parse_grid(spec, flag)
        else:
            fixed = _opt(args, cfg, name, float)
            if fixed is None:
                raise LoopParameterError(f"missing --{name} or --sweep-{name}")
            grids[name] = np.array([fixed])
    if all(len(g) == 1 for g in grids.values()):
        raise ValueError("sweep needs at least one --sweep-* grid with more than one point")

    header = [
        "tau1", "tau2", "k_vco", "k", "a", "case",
        "omega_l", "omega_l_c", "d", "y_l", "y_l_c",
        "gardner", "best_pull_out_based", "huque_stensby_pull_out",
    ]
    rows: list[list] = []
    for tau1 in grids["tau1"]:
        for tau2 in grids["tau2"]:
            for kvco in grids["kvco"]:
                for k in grids["k"]:
                    params = LoopParams(tau1=float(tau1), tau2=float(tau2),
                                        k_vco=float(kvco), k=float(k))
                    coeffs = derived_coeffs(params)
                    result = lock_in_ranges(params)
                    est = estimates(params)
                    rows.append([
                        params.tau1, params.tau2, params.k_vco, params.k,
                        coeffs.a, coeffs.case.value,
                        result.omega_l, result.omega_l_c, result.d,
                        result.y_l, result.y_l_c,
                        est.gardner, est.best_pull_out_based, est.huque_stensby_pull_out,
                    ])
    _emit(out, fmt, header, rows)
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace, cfg: dict[str, str]) -> int:
    seed = _opt(args, cfg, "seed", int, 0)
    n_sets = _opt(args, cfg, "n_sets", int, 4)
    out = _opt(args, cfg, "out", str)
    fmt = _opt(args, cfg, "format", str, "csv")

    rng = np.random.default_rng(seed)
    cases = [StabilityCase.FOCUS, StabilityCase.NODE, StabilityCase.DEGENERATE_NODE]
    param_sets: list[LoopParams] = []
    try:
        param_sets.append(_loop_params(args, cfg))
    except LoopParameterError:
        pass  # no explicit loop given; use random sets only
    while len(param_sets) < max(n_sets, 1):
        param_sets.append(sample_loop_params(rng, cases[len(param_sets) % 3]))

    checks: list[list] = []
    failures = 0

    def record(name: str, label: str, value: float, bound: float) -> None:
        nonlocal failures
        ok = value <= bound
        if not ok:
            failures += 1
        verdict = "PASS" if ok else "FAIL"
        print(f"{verdict} {name} [{label}]: {value:.3e} <= {bound:.0e}")
        checks.append([name, label, value, bound, verdict])

    for i, params in enumerate(param_sets):
        coeffs = derived_coeffs(params)
        label = f"set {i} ({coeffs.case.value}, a={coeffs.a:.3g}, k={params.k:.3g})"
        result = lock_in_ranges(params)

        wl = lock_in_numeric(params)
        record("lock-in formula vs bisection", label,
               abs(wl - result.omega_l) / result.omega_l, 5e-3)
        wlc = conservative_lock_in_numeric(params)
        record("conservative formula vs bisection", label,
               abs(wlc - result.omega_l_c) / result.omega_l_c, 5e-3)

        marks = separatrix_landmarks_numeric(params)
        analytic = {
            "pos_break": 0.5 * (coeffs.c - coeffs.a),
            "zero": result.y_l,
            "neg_break": result.d,
            "minus_pi": result.y_l_c,
        }
        worst = max(abs(marks[nm] - analytic[nm]) / analytic[nm] for nm in analytic)
        record("separatrix analytic vs traced", label, worst, 1e-5)

        omega = float(rng.uniform(0.2, 2.0) * result.omega_l)
        x_eq = params.tau1 * omega / params.k_vco
        initial = State(
            x=x_eq + float(rng.uniform(-1.0, 1.0)) * abs(x_eq + 1e-3),
            theta_e=float(rng.uniform(-2.0 * math.pi, 2.0 * math.pi)),
        )
        traj = integrate(params, omega, initial)
        v0 = float(lyapunov_values(np.array([initial.x]), initial.theta_e, params, omega)[0])
        record("energy decrease audit", label,
               lyapunov_audit(traj, params, omega), 1e-6 * max(v0, 1e-12))

    print(f"{len(checks)} checks, {failures} failures")
    if out:
        _emit(out, fmt, ["check", "set", "value", "bound", "verdict"], checks)
    return EXIT_OK if failures == 0 else EXIT_NUMERIC


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--tau1", type=float, help="loop-filter time constant tau1, s")
    common.add_argument("--tau2", type=float, help="loop-filter time constant tau2, s")
    common.add_argument("--kvco", type=float, help="VCO gain, rad/(s*V)")
    common.add_argument("--k", type=float, help="PD rising slope (> 1/pi)")
    common.add_argument("--omega", type=float, help="frequency error / step, rad/s")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    common.add_argument("--seed", type=int, help="seed for randomized batches")

    parser = argparse.ArgumentParser(
        prog="pll-lockin",
        description="Exact lock-in ranges for type 2 PLLs with a piecewise-linear phase detector.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common],
                       help="closed-form ranges, classification, estimate comparison")
    p.set_defaults(handler=_cmd_analyze)

    p = sub.add_parser("simulate", parents=[common], help="integrate one trajectory")
    p.add_argument("--scenario", choices=("step", "saddle-step", "free"),
                   help="experiment type (default step)")
    p.add_argument("--x0", type=float, help="initial loop-filter state (scenario=free)")
    p.add_argument("--theta0", type=float, help="initial phase error, rad (scenario=free)")
    p.add_argument("--t-max", dest="t_max", type=float, help="time horizon, reduced units")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("portrait", parents=[common],
                       help="phase-portrait dataset (trajectory grid + separatrix + landmarks)")
    p.add_argument("--grid-n", dest="grid_n", type=int, help="trajectory grid size per axis (default 9)")
    p.add_argument("--t-span", dest="t_span", type=float, help="trajectory length, reduced time (default 3)")
    p.add_argument("--n-samples", dest="n_samples", type=int, help="separatrix samples (default 256)")
    p.add_argument("--y-max", dest="y_max", type=float, help="grid half-height (default 1.5*d)")
    p.set_defaults(handler=_cmd_portrait)

    p = sub.add_parser("sweep", parents=[common], help="ranges and estimates over parameter grids")
    p.add_argument("--sweep-tau1", dest="sweep_tau1", help="grid lo:hi:n for tau1")
    p.add_argument("--sweep-tau2", dest="sweep_tau2", help="grid lo:hi:n for tau2")
    p.add_argument("--sweep-kvco", dest="sweep_kvco", help="grid lo:hi:n for k_vco")
    p.add_argument("--sweep-k", dest="sweep_k", help="grid lo:hi:n for k")
    p.set_defaults(handler=_cmd_sweep)

    p = sub.add_parser("verify", parents=[common],
                       help="cross-validate formulas against the simulation oracle")
    p.add_argument("--n-sets", dest="n_sets", type=int,
                   help="number of parameter sets in the batch (default 4)")
    p.set_defaults(handler=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _read_config(args.config) if args.config else {}
        return args.handler(args, cfg)
    except (LoopParameterError, ApplicabilityError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericsError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
