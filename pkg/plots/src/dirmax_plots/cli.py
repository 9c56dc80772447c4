"""Command line: dirmax-plots render --kind K --in CSV --out IMG."""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dirmax-plots")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--in", dest="csv_path", required=True)
    p.add_argument("--out", dest="out_path", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        render(FigureSpec(csv_path=args.csv_path, kind=args.kind,
                          out_path=args.out_path))
        return 0
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
