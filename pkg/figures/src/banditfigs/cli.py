"""Command-line entry points: render-fig and render-table."""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from .render import MissingCellError, render_histograms, render_table


def fig_main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="render-fig",
        description="Render the 6x4 histogram panel grid from a reproduce fig run",
    )
    parser.add_argument("--data", required=True, help="directory with hist_*.csv files")
    parser.add_argument("--out", required=True, help="output image path (png/pdf/svg)")
    args = parser.parse_args(argv)
    try:
        render_histograms(args.data, args.out)
    except (MissingCellError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def table_main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="render-table",
        description="Render a reproduction table CSV as Markdown",
    )
    parser.add_argument("--data", required=True, help="table CSV path")
    parser.add_argument("--out", required=True, help="output Markdown path")
    args = parser.parse_args(argv)
    try:
        render_table(args.data, args.out)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(fig_main())
