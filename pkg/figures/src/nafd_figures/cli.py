"""Batch figure rendering.

Either one figure from flags:

    nafd-isac-render --kind contour --input out/contour.csv \
        --layout out/layout.csv --out map.png

or several from a spec file, a JSON list of figure entries:

    nafd-isac-render --spec figures.json
"""

import argparse
import json
import sys

from .render import KINDS, FigureSpec, render_spec

__all__ = ["build_parser", "main"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nafd-isac-render",
        description="Render figures from simulator CSV artifacts.")
    parser.add_argument("--spec", help="JSON file listing figures to render")
    parser.add_argument("--kind", choices=KINDS, help="figure kind")
    parser.add_argument("--input", help="primary CSV artifact")
    parser.add_argument("--layout", help="deployment CSV overlaid on maps")
    parser.add_argument("--value", default="speb",
                        help="field to plot where a choice exists")
    parser.add_argument("--title", help="figure title override")
    parser.add_argument("--out", help="output image path")
    return parser


def _specs_from_args(args) -> list:
    if args.spec is not None:
        if args.kind or args.input or args.out:
            raise ValueError("--spec replaces the per-figure flags; "
                             "use one or the other")
        with open(args.spec) as fh:
            entries = json.load(fh)
        if not isinstance(entries, list):
            raise ValueError(f"{args.spec} must contain a JSON list")
        return [FigureSpec(**entry) for entry in entries]
    if not (args.kind and args.input and args.out):
        raise ValueError("--kind, --input and --out are required "
                         "without --spec")
    return [FigureSpec(kind=args.kind, input=args.input, out=args.out,
                       layout=args.layout, value=args.value,
                       title=args.title)]


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        specs = _specs_from_args(args)
        for spec in specs:
            print(render_spec(spec))
    except (ValueError, OSError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
