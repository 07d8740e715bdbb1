"""figgen command line: fig3 CSV in, PNG or SVG out."""

from __future__ import annotations

import argparse
import sys

from .render import ColumnError, render_fig3


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="figgen",
        description="Render normalized rate curves, optionally overlaying "
        "retro-sim means scaled by log2(d).",
    )
    parser.add_argument("fig3_csv", help="CSV produced by `caplab fig3`")
    parser.add_argument("--overlay", help="CSV produced by `caplab retro-sim`")
    parser.add_argument("--out", required=True, help="output image (.png or .svg)")
    args = parser.parse_args(argv)
    try:
        result = render_fig3(args.fig3_csv, args.overlay, args.out)
    except ColumnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {result.out_image}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
