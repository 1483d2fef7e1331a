"""Command-line entry point: ``isoflow {bench,run,check,report}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .bench import (
    emit_csv,
    emit_markdown_table,
    load_config,
    markdown_table,
    read_csv,
    run_grid,
    run_trajectory,
    shipped_config,
    write_trajectory,
)
from .checks import run_checks
from .errors import IsoflowError
from .integrators import StepConfig
from .models import load_coefficients, make_model
from .tableaux import gauss

__all__ = ["main", "build_parser"]


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _str_list(text: str) -> list[str]:
    return [x.strip().upper() for x in text.split(",") if x.strip()]


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat JSON config file, or 'desk' / 'full' for a shipped grid")
    p.add_argument("--model", choices=("zeitlin", "rigid_body", "static"))
    p.add_argument("--N", type=_int_list, help="matrix sizes, e.g. 17,33")
    p.add_argument("--s", type=_int_list, help="Gauss-Legendre stage counts, e.g. 1,2,3")
    p.add_argument("--scheme", type=_str_list, help="schemes, e.g. A,B,C")
    p.add_argument("--h", type=float, help="step size")
    p.add_argument("--t-end", type=float, help="simulated time")
    p.add_argument("--tol", type=float, help="fixed-point tolerance")
    p.add_argument("--reps", type=int, help="timed repetitions per cell")
    p.add_argument("--out", help="output directory (default: $ISOFLOW_OUT or ./isoflow_out)")
    p.add_argument("--dump-frames", action="store_true", default=None, help="write ISOFLOW1 trajectories")
    p.add_argument("--ic", help="initial condition file with 'l m re im' lines")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="isoflow", description="Isospectral flow integrators and benchmarks.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bench", help="run a benchmark grid and write CSV and markdown results")
    _add_run_flags(p)

    p = sub.add_parser("run", help="integrate a single trajectory and print its diagnostics")
    _add_run_flags(p)

    sub.add_parser("check", help="run the structural verification suite")

    p = sub.add_parser("report", help="turn a results CSV into a markdown table")
    p.add_argument("csv", help="CSV written by 'isoflow bench'")
    p.add_argument("--out", help="markdown output path (default: print to stdout)")
    return parser


def _config(args):
    path = args.config
    if path in ("desk", "full"):
        path = shipped_config(path)
    overrides = {
        "model": args.model,
        "N": args.N,
        "s": args.s,
        "schemes": args.scheme,
        "h": args.h,
        "t_end": args.t_end,
        "fp_tolerance": args.tol,
        "reps": args.reps,
        "out": args.out,
        "dump_frames": args.dump_frames,
        "ic": args.ic,
    }
    return load_config(path, overrides)


def _cmd_bench(args) -> int:
    cfg = _config(args)
    records = run_grid(cfg)
    out = Path(cfg.out)
    emit_csv(records, out / "results.csv")
    emit_markdown_table(records, out / "results.md")
    print(markdown_table(records), end="")
    print(f"wrote {out / 'results.csv'} and {out / 'results.md'}")
    failed = [r for r in records if not r.ok]
    for r in failed:
        print(f"failed: N={r.N} s={r.s} scheme {r.scheme}: {r.message}", file=sys.stderr)
    return 1 if failed else 0


def _cmd_run(args) -> int:
    cfg = _config(args)
    if len(cfg.N) != 1 or len(cfg.s) != 1 or len(cfg.schemes) != 1:
        raise IsoflowError("run takes exactly one N, one s and one scheme")
    N, s, scheme = cfg.N[0], cfg.s[0], cfg.schemes[0]
    model = make_model(cfg.model, N)
    W0 = model.initial_state() if cfg.ic is None else model.initial_state(load_coefficients(cfg.ic))
    step_cfg = StepConfig(tableau=gauss(s), h=cfg.h, fp_tolerance=cfg.fp_tolerance, fp_max_iters=cfg.fp_max_iters)
    result, frames, diag = run_trajectory(model, W0, scheme, step_cfg, cfg.t_end, keep_frames=True)
    summary = {
        "model": cfg.model,
        "N": N,
        "scheme": scheme,
        "s": s,
        "h": cfg.h,
        "steps": result.steps,
        "wall_time_s": result.wall_time,
        "fp_iters_mean": result.fp_iterations_mean,
        "fp_iters_max": result.fp_iterations_max,
        "spectrum_drift": diag.spectrum_drift,
        "casimir2_drift": diag.casimir2_drift,
        "casimir3_drift": diag.casimir3_drift,
        "ham_drift": diag.ham_drift,
        "group_residual": diag.group_residual,
    }
    if cfg.dump_frames:
        meta = {"model": cfg.model, "N": N, "scheme": scheme, "s": s, "h": cfg.h}
        path = write_trajectory(frames, meta, Path(cfg.out) / f"trajectory_{cfg.model}_N{N}_s{s}_{scheme}.isoflow")
        summary["trajectory"] = str(path)
    print(json.dumps(summary, indent=2))
    return 0


def _cmd_check(args) -> int:
    results = run_checks()
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


def _cmd_report(args) -> int:
    records = read_csv(args.csv)
    if args.out:
        emit_markdown_table(records, args.out)
        print(f"wrote {args.out}")
    else:
        print(markdown_table(records), end="")
    return 0


_COMMANDS = {"bench": _cmd_bench, "run": _cmd_run, "check": _cmd_check, "report": _cmd_report}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return _COMMANDS[args.command](args)
    except (IsoflowError, ValueError) as exc:
        print(f"isoflow {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
