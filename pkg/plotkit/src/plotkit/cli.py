"""Command-line entry point: ``plotkit plot <spec-file>``."""

from __future__ import annotations

import argparse
import sys

from .render import render
from .specs import SpecError, load_spec


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plotkit", description="Render figures from dgbench CSV outputs")
    sub = parser.add_subparsers(dest="command", required=True)
    p_plot = sub.add_parser("plot", help="render one plot specification")
    p_plot.add_argument("spec", help="path to an INI plot spec")
    p_plot.add_argument("--output", help="override the output image path")
    args = parser.parse_args(argv)

    try:
        spec = load_spec(args.spec)
        if args.output:
            spec.output = args.output
        path = render(spec)
    except SpecError as exc:
        print(f"plot spec error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
