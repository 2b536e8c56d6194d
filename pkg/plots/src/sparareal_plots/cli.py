"""Command-line entry point: render one figure preset from a CSV directory."""

from __future__ import annotations

import argparse
import sys

from .data import PlotDataError
from .figures import build_spec, render

EXIT_OK = 0
EXIT_DATA = 1


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="sparareal-plots",
        description="Render solver-lab CSV output into figure files.")
    parser.add_argument("command", choices=["render"])
    parser.add_argument("--preset", required=True, help="figure preset name")
    parser.add_argument("--csv-dir", required=True,
                        help="directory holding the preset's CSV files")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)

    try:
        spec = build_spec(args.preset, args.csv_dir, args.out)
        render(spec)
    except PlotDataError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DATA
    print(f"wrote {args.out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
