"""Command-line figure renderer: plot --in <csv> --kind <kind> --out <img>."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import FigureKind, FigureSpec, PlotDataError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot", description="Render beamforming sweep CSVs to figures")
    parser.add_argument("--in", dest="input_csv", type=Path, required=True,
                        help="sweep CSV produced by the solver harness")
    parser.add_argument("--kind", required=True,
                        choices=[k.value for k in FigureKind])
    parser.add_argument("--out", dest="output", type=Path, required=True,
                        help="image file to write (png, pdf, svg, ...)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(input_csv=args.input_csv,
                      figure_kind=FigureKind(args.kind),
                      output=args.output)
    try:
        out = render(spec)
    except PlotDataError as exc:
        print(f"plot error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
