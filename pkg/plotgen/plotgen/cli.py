"""plotgen <kind> --in <files...> --out <image> [--band-height H]"""

from __future__ import annotations

import argparse
import sys

from .render import RENDERERS, render
from .schemas import SchemaError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotgen",
        description="Render figures from simulator CSV outputs",
    )
    parser.add_argument("kind", choices=sorted(RENDERERS),
                        help="figure kind to render")
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        help="input CSV file(s)")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--band-height", type=float, default=0.1,
                        help="vehicle height H for the hybrid-band shading, m")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        render(args.kind, args.inputs, args.out, band_height=args.band_height)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
