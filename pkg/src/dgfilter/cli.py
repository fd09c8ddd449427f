"""Command-line entry point.

Subcommands:
  run <config>                 run one benchmark configuration
  convergence <config> -l N   run a resolution study (nx doubling per level)
  table <report.json ...>      print a result table from saved run reports

Exit codes: 0 success, 1 configuration error, 2 solver failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .config import load_config
from .errors import ConfigError, MeshError, StateError
from .output import emit_table, ensure_dir
from .runner import run_benchmark, run_convergence


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dgbench",
        description="Filtered-DG benchmark runner for hyperbolic conservation laws",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one benchmark configuration")
    p_run.add_argument("config", help="path to an INI run configuration")
    p_run.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                       help="override a config value (repeatable)")
    p_run.add_argument("--verbose", action="store_true", help="print progress")

    p_conv = sub.add_parser("convergence", help="resolution study on one benchmark")
    p_conv.add_argument("config")
    p_conv.add_argument("--levels", "-l", type=int, default=3)
    p_conv.add_argument("--variable", default="rho", help="variable for the table")
    p_conv.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE")
    p_conv.add_argument("--verbose", action="store_true")

    p_table = sub.add_parser("table", help="tabulate saved run reports")
    p_table.add_argument("reports", nargs="+", help="report.json files, coarse to fine")
    p_table.add_argument("--variable", default="rho")
    return parser


def _cmd_run(args) -> int:
    cfg = load_config(args.config, overrides=args.set)
    report = run_benchmark(cfg, quiet=not args.verbose)
    print(f"benchmark {report.benchmark}: {report.n_steps} steps to t = {report.t_final:.6g} "
          f"({report.n_cells_final} cells, {report.wall_time_s:.1f} s)")
    for name, (lo, hi) in report.extrema.items():
        print(f"  {name}: min {lo:.6g}  max {hi:.6g}")
    for name, err in report.errors.items():
        print(f"  {name}: L1 {err['l1_rel']:.3e}  L2 {err['l2_rel']:.3e}  "
              f"Linf {err['linf_rel']:.3e}")
    if report.failed:
        print(f"solver failure: {report.failure}", file=sys.stderr)
        return 2
    return 0


def _cmd_convergence(args) -> int:
    cfg = load_config(args.config, overrides=args.set)
    rows = run_convergence(cfg, args.levels, variable=args.variable,
                           quiet=not args.verbose)
    text = emit_table([{"n_el": r["n_el"], "errors": r["errors"]} for r in rows],
                      variable=args.variable)
    print(text)
    outdir = ensure_dir(cfg.output.directory)
    table_path = os.path.join(outdir, "convergence.txt")
    with open(table_path, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")
    csv_path = os.path.join(outdir, "convergence.csv")
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("n_el,l1_rel,l2_rel,linf_rel,max_value,min_value\n")
        for r in rows:
            e = r["errors"]
            fh.write(f"{r['n_el']},{e['l1_rel']!r},{e['l2_rel']!r},"
                     f"{e['linf_rel']!r},{e['max_value']!r},{e['min_value']!r}\n")
    print(f"wrote {table_path} and {csv_path}")
    return 0


def _cmd_table(args) -> int:
    rows = []
    for path in args.reports:
        with open(path, "r", encoding="utf-8") as fh:
            rep = json.load(fh)
        if args.variable not in rep["errors"]:
            raise ConfigError(f"{path}: no error report for variable {args.variable!r}")
        rows.append({"n_el": rep["nx"], "errors": rep["errors"][args.variable]})
    print(emit_table(rows, variable=args.variable))
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "convergence":
            return _cmd_convergence(args)
        return _cmd_table(args)
    except (ConfigError, MeshError, FileNotFoundError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except StateError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
