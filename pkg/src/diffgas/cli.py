"""Command-line entry point: ``diffgas {riemann,run,convergence,decay}``.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import diagnostics as diag
from .config import load_config
from .experiments import check_decay_setup, convergence_study, decay_study
from .riemann import RiemannSolverError, max_wave_speed, sample, solve
from .scheme import ConfigError, StepFailure, run
from .serialize import JsonLinesSink, SnapshotSink, dumps, write_json
from .thermo import GasConstants, PrimitiveState, pressure

log = logging.getLogger("diffgas")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _state(text: str) -> PrimitiveState:
    try:
        rho, u, S = (float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"state must be 'rho,u,S', got {text!r}") from None
    if not all(np.isfinite([rho, u, S])) or rho < 0.0:
        raise UsageError(f"invalid state {text!r}")
    return PrimitiveState(rho, u, S)


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _say(args, text: str):
    if not args.quiet:
        print(text)


def cmd_riemann(args) -> int:
    left, right = _state(args.left), _state(args.right)
    if args.samples < 2 or not args.t > 0.0:
        raise UsageError("--samples must be >= 2 and --t positive")
    try:
        k = GasConstants(args.gamma, args.gas_const)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        fan = solve(left, right, k)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    c = float(max_wave_speed(fan, k))
    span = 1.25 * max(c, abs(float(fan.vac_u_left)), abs(float(fan.vac_u_right)), 1e-12)
    xi = np.linspace(-span, span, args.samples)
    st = sample(fan, xi, k)
    out = _out_dir(args)
    csv_path = Path(args.out) if args.out else out / "riemann.csv"
    p = pressure(st, k)
    with csv_path.open("w") as fh:
        fh.write("x,xi,rho,u,S,p\n")
        for row in zip(xi * args.t, xi, st.rho, st.u, st.S, p):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    summary = {
        "p_star": fan.p_star,
        "u_star": fan.u_star,
        "rho_left_star": fan.rho_left_star,
        "rho_right_star": fan.rho_right_star,
        "wave1": fan.wave1_kind.value,
        "wave3": fan.wave3_kind.value,
        "wave_speeds": list(np.asarray(fan.wave_speeds, dtype=float)),
        "max_wave_speed": c,
        "vacuum": fan.vacuum,
        "vacuum_edges": [fan.vac_u_left, fan.vac_u_right],
    }
    write_json(csv_path.with_suffix(".json"), summary)
    _say(args, dumps(summary))
    return EXIT_OK


def _run_summary(res, k):
    f0, f = res.initial_field, res.field
    out = {
        "steps": res.steps,
        "t_final": f.time,
        "mass_delta": float(np.sum(f.rho) * f.dx - np.sum(f0.rho) * f0.dx),
        "momentum_delta": float(np.sum(f.m) * f.dx - np.sum(f0.m) * f0.dx),
        "max_growth_factor": res.ledger.max_growth_factor if res.ledger else None,
        "growth_bound": res.ledger.total_bound if res.ledger else None,
        "ledger_ok": res.ledger.ok if res.ledger else None,
        "C_measured": res.ledger.C_measured if res.ledger else None,
        "entropy_total": diag.entropy_total(f, k),
    }
    if res.means is not None and res.records[-1].get("decay_L1") is not None:
        out["decay_initial"] = res.records[0]["decay_L1"]
        out["decay_final"] = res.records[-1]["decay_L1"]
    else:
        out["decay_final"] = diag.decay_metric(f, res.means)
    return out


def _config(args):
    path = args.config_path or args.config
    if path is None:
        raise UsageError("a config file is required (--config PATH)")
    return load_config(path)


def cmd_run(args) -> int:
    config = _config(args)
    out = _out_dir(args)
    snaps = SnapshotSink(out, config.constants)
    with JsonLinesSink(out / "diagnostics.jsonl") as jl:
        res = run(config, [snaps, jl])
    summary = _run_summary(res, config.constants)
    write_json(out / "summary.json", summary)
    _say(args, dumps(summary))
    return EXIT_OK


def cmd_convergence(args) -> int:
    config = _config(args)
    out = _out_dir(args)
    result = convergence_study(config, args.levels)
    table = {
        "n_cells": result.n_cells,
        "errors": result.errors,
        "orders": result.orders,
    }
    write_json(out / "convergence.json", table)
    if not args.quiet:
        print(f"{'n_coarse':>10} {'n_fine':>10} {'L1 diff':>14} {'order':>8}")
        orders = [None] + result.orders
        for i, e in enumerate(result.errors):
            o = "" if orders[i] is None else f"{orders[i]:8.3f}"
            print(f"{result.n_cells[i]:>10d} {result.n_cells[i + 1]:>10d} {e:>14.6e} {o:>8}")
    return EXIT_OK


def cmd_decay(args) -> int:
    config = _config(args)
    check_decay_setup(config)
    out = _out_dir(args)
    with JsonLinesSink(out / "diagnostics.jsonl") as jl:
        result = decay_study(config, [jl])
    with (out / "decay.csv").open("w") as fh:
        fh.write("t,decay_L1\n")
        for t, d in zip(result.times, result.metric):
            fh.write(f"{t!r},{d!r}\n")
    summary = {
        "ratio": result.ratio,
        "initial": result.metric[0],
        "final": result.metric[-1],
        "smoothed_decreasing": result.smoothed_decreasing,
        "steps": result.result.steps,
    }
    write_json(out / "decay_summary.json", summary)
    _say(args, dumps(summary))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration (INI)")
    common.add_argument("--out-dir", default=".", help="directory for outputs")
    common.add_argument("--quiet", action="store_true")

    parser = argparse.ArgumentParser(prog="diffgas", parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    # globals are accepted after the subcommand too; SUPPRESS keeps the top-level value
    sub_common = argparse.ArgumentParser(add_help=False)
    sub_common.add_argument("--config", default=argparse.SUPPRESS)
    sub_common.add_argument("--out-dir", default=argparse.SUPPRESS)
    sub_common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)

    p = sub.add_parser("riemann", parents=[sub_common], help="solve one Riemann problem")
    p.add_argument("--left", required=True, help="rho,u,S")
    p.add_argument("--right", required=True, help="rho,u,S")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--gas-const", type=float, required=True)
    p.add_argument("--samples", type=int, default=201)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--out", help="CSV path (summary goes next to it as .json)")
    p.set_defaults(func=cmd_riemann)

    for name, func, text in (
        ("run", cmd_run, "run a configured simulation"),
        ("convergence", cmd_convergence, "self-convergence under refinement"),
        ("decay", cmd_decay, "long-time decay to the means"),
    ):
        p = sub.add_parser(name, parents=[sub_common], help=text)
        p.add_argument("config_path", nargs="?", help="configuration file")
        if name == "convergence":
            p.add_argument("--levels", type=int, default=3)
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"diffgas: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (StepFailure, RiemannSolverError, RuntimeError, FloatingPointError) as exc:
        print(f"diffgas: run failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
