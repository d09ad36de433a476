"""plot-converge: render convergence figures from an experiment directory."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import KINDS, FigureSpec, PlotError, plot


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot-converge",
        description="Render figures from an edffluid experiment directory.",
    )
    parser.add_argument("directory", help="experiment directory (meta.json + CSVs)")
    parser.add_argument("--kind", choices=KINDS, required=True, help="figure kind")
    parser.add_argument("--out", required=True, help="output image path (.svg default, .png works)")
    args = parser.parse_args(argv)
    try:
        out = plot(FigureSpec(Path(args.directory), args.kind, Path(args.out)))
    except PlotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
