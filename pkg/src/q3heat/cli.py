"""Command-line front end: one subcommand per device function plus validate.

Summaries go to stdout, diagnostics to stderr, CSVs only to files.
Exit codes: 0 success (including defined degradations), 2 configuration
or validation error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from ._backend import backend_name
from ._version import __version__
from .eigensystem import (
    analytic_eigensystem,
    build_channels,
    build_hamiltonian,
    numeric_diagonalization_oracle,
    secular_report,
)
from .errors import (
    BothCurrentsZero,
    ConfigurationError,
    DegenerateDenominator,
    NumericalError,
    Q3HeatError,
)
from .functions import (
    amplification,
    rectification,
    stabilizer_sensitivity,
    switch_threshold,
    valve_crossings,
)
from .model import BATH_LABELS, Config
from .oracles import liouvillian_oracle, relaxation_oracle
from .steady import steady_point
from .sweep import (
    RunConfig,
    SweepAxis,
    point_result,
    read_config,
    run_sweep,
    table_result,
    write_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _parse_range(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigurationError(f"--range expects a:b:n, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigurationError(f"--range expects numbers a:b:n, got {text!r}") from None
    if n < 2 or not lo < hi:
        raise ConfigurationError(f"--range needs a < b and n >= 2, got {text!r}")
    return lo, hi, n


def _load(args) -> RunConfig:
    return read_config(args.config, args.set or [])


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


def _maybe_write(args, result) -> None:
    if args.out:
        write_csv(result, args.out)
        _info(f"wrote {args.out}")


def _warn_secular(config: Config) -> None:
    rep = secular_report(config)
    if not rep.valid:
        _info(
            f"warning: secular approximation strained: gamma_max/min_gap = {rep.ratio:.3g} "
            f">= 0.1 (min Bohr gap {rep.min_gap:.3g})"
        )


def cmd_steady(args) -> int:
    run = _load(args)
    eig, _channels, _rates, state, currents = steady_point(run.config)
    rep = secular_report(run.config)
    print(f"heat currents (omega_R^2 units, positive = absorbed from bath):")
    for lab, q in currents.as_dict().items():
        print(f"  Q_{lab} = {q: .12e}")
    print(f"first-law residual |sum Q| = {abs(sum(currents.as_dict().values())):.3e}")
    print("populations (eigenbasis, levels 1..8):")
    print("  " + "  ".join(f"{p:.9e}" for p in state.populations))
    print(f"solver residual {state.residual:.3e}, condition ~{state.cond:.2e}")
    print(
        f"secular check: gamma_max/min_gap = {rep.ratio:.3g} "
        f"({'ok' if rep.valid else 'WARNING: secular approximation strained'})"
    )
    if args.out:
        run_pt = RunConfig(run.config, (), ("Q_L", "Q_M", "Q_R", "populations", "secular_ratio"), run.rectify, run.echo)
        _maybe_write(args, point_result(run_pt))
    return EXIT_OK


def cmd_sweep(args) -> int:
    run = _load(args)
    _warn_secular(run.config)
    result = run_sweep(run, threads=args.threads)
    failed = sum(1 for f in result.flags if f)
    if failed:
        _info(f"{failed} of {len(result.flags)} points carry flags")
    _maybe_write(args, result)
    print(f"sweep over {' x '.join(result.axis_names)}: {result.values.shape[0]} points, "
          f"columns: {', '.join(result.columns)}")
    return EXIT_OK


def _range_or(args, default_lo, default_hi, default_n) -> tuple[float, float, int]:
    if args.range:
        return _parse_range(args.range)
    return default_lo, default_hi, default_n


def cmd_amplifier(args) -> int:
    run = _load(args)
    _warn_secular(run.config)
    lo, hi, n = _range_or(args, 0.05, 0.5, 100)
    axes = (SweepAxis("bath.M.temperature", lo, hi, n),)
    run_a = RunConfig(run.config, axes, ("Q_L", "Q_M", "Q_R", "alpha_L", "alpha_R"), run.rectify, run.echo)
    result = run_sweep(run_a, threads=args.threads)
    _maybe_write(args, result)
    cols = {c: i + 1 for i, c in enumerate(result.columns)}
    a_l = result.values[:, cols["alpha_L"]]
    a_r = result.values[:, cols["alpha_R"]]
    defined = ~np.isnan(a_l)
    if defined.any():
        print(f"amplification over T_M in [{lo}, {hi}]: "
              f"max|alpha_L| = {np.nanmax(np.abs(a_l)):.3f}, max|alpha_R| = {np.nanmax(np.abs(a_r)):.3f}")
        worst = np.nanmax(np.abs(a_l + a_r + 1.0))
        print(f"first-law identity max|alpha_L + alpha_R + 1| = {worst:.2e}")
    flagged = sum(1 for f in result.flags if f)
    if flagged:
        _info(f"{flagged} points flagged (switch-off plateau or unresolved derivative)")
    return EXIT_OK


def cmd_valve(args) -> int:
    run = _load(args)
    _warn_secular(run.config)
    lo, hi, n = _range_or(args, 0.005, 0.8, 400)
    report = valve_crossings(run.config, (lo, hi), n)
    if args.out:
        result = table_result(run, "bath.M.temperature", report.grid,
                              ("Q_L", "Q_M", "Q_R"), report.currents)
        _maybe_write(args, result)
    if report.crossings:
        print("valve crossings (terminal current cut off):")
        print(f"  {'terminal':<9}{'T_M*':>12}{'bracket':>12}")
        for c in report.crossings:
            print(f"  {c.terminal:<9}{c.temperature:>12.6f}{c.bracket:>12.2e}")
    else:
        print("no crossings in the scanned range")
    return EXIT_OK


def cmd_rectify(args) -> int:
    run = _load(args)
    _warn_secular(run.config)
    if run.rectify is None and args.t_a is None:
        raise ConfigurationError("rectify needs a rectify block in the config or --t-a")
    t_a = args.t_a if args.t_a is not None else run.rectify.T_A
    mode = "two-terminal" if args.two_terminal else (run.rectify.mode if run.rectify else "three-terminal")
    if args.delta_t is not None:
        try:
            res = rectification(run.config, args.delta_t, t_a, mode)
            print(f"delta_T = {res.delta_T}: Q_fore = {res.Q_fore:.6e}, Q_back = {res.Q_back:.6e}, "
                  f"R = {res.R:.6f} ({mode})")
        except BothCurrentsZero as exc:
            print(f"R undefined: {exc}")
        return EXIT_OK
    lo, hi, n = _range_or(args, -0.45, 0.45, 91)
    from .sweep import RectifySettings

    rect = RectifySettings(T_A=t_a, mode=mode)
    outputs = ("Q_L", "Q_M", "Q_R", "R") if mode == "two-terminal" else ("Q_L", "Q_M", "Q_R")
    base = run.config
    if mode == "two-terminal":
        from .model import BathSpec

        base = Config(base.params, tuple(
            BathSpec(b.label, b.temperature, 0.0, b.spectrum) if b.label == "L" else b
            for b in base.baths
        ))
    run_r = RunConfig(base, (SweepAxis("delta_T", lo, hi, n),), outputs, rect, run.echo)
    result = run_sweep(run_r, threads=args.threads)
    _maybe_write(args, result)
    cols = {c: i + 1 for i, c in enumerate(result.columns)}
    q_r = result.values[:, cols["Q_R"]]
    sign_changes = [
        (result.values[i, 0], result.values[i + 1, 0])
        for i in range(len(q_r) - 1)
        if np.isfinite(q_r[i]) and np.isfinite(q_r[i + 1]) and q_r[i] * q_r[i + 1] < 0
    ]
    print(f"rectify sweep delta_T in [{lo}, {hi}] ({mode}, T_A = {t_a}): {len(q_r)} points")
    for a, b in sign_changes:
        print(f"  Q_R changes sign between delta_T = {a:.6f} and {b:.6f}")
    if "R" in cols:
        r = result.values[:, cols["R"]]
        if np.isfinite(r).any():
            print(f"  max R = {np.nanmax(r):.6f} at |delta_T| = {abs(result.values[int(np.nanargmax(r)), 0]):.4f}")
    return EXIT_OK


def cmd_stabilizer(args) -> int:
    run = _load(args)
    _warn_secular(run.config)
    lo, hi, n = _range_or(args, 0.0, 0.8, 161)
    report = stabilizer_sensitivity(run.config, args.terminal, (lo, hi), n)
    if args.out:
        result = table_result(run, f"bath.{args.terminal}.temperature", report.grid,
                              ("Q_L", "Q_M", "Q_R"), report.currents)
        _maybe_write(args, result)
    print(f"stabilizer scan of T_{args.terminal} over [{lo}, {hi}]:")
    print(f"  {'current':<9}{'span':>14}{'flatness':>12}{'peak |dQ/dT|':>16}")
    for lab in BATH_LABELS:
        m = report.per_current[lab]
        print(f"  Q_{lab:<7}{m.span:>14.4e}{m.flatness:>12.4f}{m.peak_slope:>16.4e}")
    return EXIT_OK


def cmd_switch(args) -> int:
    run = _load(args)
    _warn_secular(run.config)
    lo, hi, n = _range_or(args, 0.0, 0.5, 200)
    report = switch_threshold(run.config, args.epsilon, (lo, hi), n)
    if args.out and report.max_current.size:
        result = table_result(run, "bath.M.temperature", report.grid,
                              ("max_QLR",), report.max_current[:, None])
        _maybe_write(args, result)
    print(f"switch threshold for epsilon = {report.epsilon:g}: T_M <= {report.threshold:.6f} "
          f"keeps |Q_L|, |Q_R| <= epsilon on the scanned grid")
    return EXIT_OK


def cmd_validate(args) -> int:
    run = _load(args)
    config = run.config
    rng = np.random.default_rng(args.seed)
    checks: list[tuple[str, bool, str]] = []

    eig = analytic_eigensystem(config.params)
    H = build_hamiltonian(config.params)
    vals, vecs = numeric_diagonalization_oracle(H)
    err_vals = float(np.abs(vals - eig.lam).max())
    sign = np.sign(np.sum(vecs * eig.U, axis=0))
    sign[sign == 0.0] = 1.0
    err_vecs = float(np.abs(vecs * sign - eig.U).max())
    scale = config.params.omega_R
    checks.append(("eigenvalues analytic vs numeric", err_vals <= 1e-10 * scale, f"max err {err_vals:.2e}"))
    checks.append(("eigenvectors analytic vs numeric", err_vecs <= 1e-8, f"max err {err_vecs:.2e}"))

    worst = 0.0
    for _ in range(args.draws):
        w_l = rng.uniform(0.55, 0.95)
        g = rng.uniform(0.05, 0.5) * (1.0 - w_l)
        from .model import DeviceParams

        p = DeviceParams.resonant(w_l, g, 1.0)
        e = analytic_eigensystem(p)
        worst = max(worst, float(np.abs(np.linalg.eigvalsh(build_hamiltonian(p)) - e.lam).max()))
    checks.append((f"eigenvalues on {args.draws} random draws", worst <= 1e-10, f"max err {worst:.2e}"))

    channels = build_channels(config.params, eig)
    comm_worst = 0.0
    for ch in channels:
        V = ch.operator_product_basis(eig)
        comm_worst = max(comm_worst, float(np.abs(H @ V - V @ H + ch.frequency * V).max()))
    checks.append(("eigenoperator commutators", comm_worst <= 1e-12 * scale, f"max residual {comm_worst:.2e}"))

    _eig2, _ch2, rates, state, currents = steady_point(config)
    oracle = liouvillian_oracle(config)
    pop_err = float(np.abs(state.populations - oracle.populations).max())
    q = currents.as_array()
    cur_scale = max(float(np.abs(q).max()), float(np.abs(oracle.currents).max()), 1e-30)
    cur_err = float(np.abs(q - oracle.currents).max()) / cur_scale
    checks.append(("steady populations vs Liouvillian null space", pop_err <= 1e-8, f"max err {pop_err:.2e}"))
    checks.append(("heat currents vs Liouvillian", cur_err <= 1e-8, f"rel err {cur_err:.2e}"))
    checks.append(("steady coherences vanish", oracle.coherence_max <= 1e-10, f"max {oracle.coherence_max:.2e}"))

    relax = relaxation_oracle(config)
    relax_err = float(np.abs(relax.populations - state.populations).max())
    checks.append(("relaxation endpoint", relax_err <= 1e-6,
                   f"max err {relax_err:.2e} at t = {relax.t_end:.3e}"))
    checks.append(("trace preserved along relaxation", relax.trace_drift <= 1e-10,
                   f"drift {relax.trace_drift:.2e}"))

    tol = max(1e-12 * float(np.abs(q).max()), 1e-25)
    checks.append(("first law", abs(q.sum()) <= tol, f"|sum Q| = {abs(q.sum()):.2e}"))
    sigma = -sum(qv / b.temperature for qv, b in zip(q, rates.baths) if b.attached and b.temperature > 0)
    checks.append(("second law", sigma >= -1e-12, f"entropy production {sigma:.2e}"))

    rep = secular_report(config, channels)
    if not rep.valid:
        _info(f"warning: secular ratio {rep.ratio:.3g} >= 0.1; results are outside the "
              "master equation's comfort zone")

    ok = True
    for name, passed, detail in checks:
        print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
        ok = ok and passed
    print(f"secular ratio {rep.ratio:.3g} ({'ok' if rep.valid else 'warning'})")
    return EXIT_OK if ok else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="q3heat",
        description="Steady-state heat currents and device functions of a "
                    "three-qubit, three-bath thermal machine.",
    )
    parser.add_argument("--version", action="version", version=f"q3heat {__version__} ({backend_name()} kernel)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_range=False):
        p.add_argument("--config", required=True, help="JSON run config path")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config field (dotted key), repeatable")
        p.add_argument("--out", help="write results as CSV to this path")
        p.add_argument("--threads", type=int, default=1, help="worker threads for grid evaluation")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
        p.add_argument("-v", "--verbose", action="store_true", help="chatty diagnostics on stderr")
        if needs_range:
            p.add_argument("--range", metavar="A:B:N", help="scan grid start:stop:count")

    p = sub.add_parser("steady", help="solve one operating point and print currents")
    common(p)
    p.set_defaults(func=cmd_steady)

    p = sub.add_parser("sweep", help="run the config's sweep block to CSV")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("amplifier", help="transistor gains along a T_M scan")
    common(p, needs_range=True)
    p.set_defaults(func=cmd_amplifier)

    p = sub.add_parser("valve", help="find control temperatures that cut off each terminal")
    common(p, needs_range=True)
    p.set_defaults(func=cmd_valve)

    p = sub.add_parser("rectify", help="directed currents and rectification factor")
    common(p, needs_range=True)
    p.add_argument("--two-terminal", action="store_true", help="detach bath L (gamma_L = 0)")
    p.add_argument("--delta-t", type=float, default=None, help="single |T_R - T_M| instead of a sweep")
    p.add_argument("--t-a", type=float, default=None, help="average temperature (T_R + T_M)/2")
    p.set_defaults(func=cmd_rectify)

    p = sub.add_parser("stabilizer", help="current sensitivity to one terminal temperature")
    common(p, needs_range=True)
    p.add_argument("--terminal", choices=["L", "R"], default="L", help="which temperature to scan")
    p.set_defaults(func=cmd_stabilizer)

    p = sub.add_parser("switch", help="largest control temperature keeping currents below epsilon")
    common(p, needs_range=True)
    p.add_argument("--epsilon", type=float, default=1e-9, help="current cutoff in omega_R^2 units")
    p.set_defaults(func=cmd_switch)

    p = sub.add_parser("validate", help="run the oracle suite against this config")
    common(p)
    p.add_argument("--draws", type=int, default=50, help="random parameter draws for the eigensystem check")
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegenerateDenominator as exc:
        print(f"undefined at this operating point: {exc}", file=sys.stderr)
        return EXIT_OK
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except Q3HeatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
