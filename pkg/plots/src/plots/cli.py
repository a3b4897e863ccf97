"""Command-line front end: --kind --input --output plus axis flags.

Exit codes: 0 success, 2 schema/validation error (offending column
named on stderr)."""

import argparse
import sys

from .render import KINDS, PlotSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="treebroadcast-plots",
        description="Render figures from treebroadcast CSV outputs.",
    )
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--title")
    p.add_argument("--xlabel")
    p.add_argument("--ylabel")
    p.add_argument("--logy", action="store_true")
    p.add_argument("--d", type=int, default=2,
                   help="branching factor for reference lines")
    p.add_argument("--dpi", type=int, default=150)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(
        kind=args.kind, input=args.input, output=args.output,
        title=args.title, xlabel=args.xlabel, ylabel=args.ylabel,
        logy=args.logy, d=args.d, dpi=args.dpi,
    )
    try:
        render(spec)
    except (SchemaError, OSError) as exc:
        print(f"error=schema message={str(exc)!r}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
