"""Command-line interface: ``sdkde-plot <kind> --in results.csv --out fig.svg``.

Exit codes: 0 on success, 2 on input/schema errors, 1 on runtime errors.
"""

from __future__ import annotations

import argparse
import sys

from .reader import SchemaError
from .render import KINDS, PlotSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sdkde-plot", description=__doc__)
    parser.add_argument("kind", choices=KINDS, help="figure kind")
    parser.add_argument("--in", dest="inputs", required=True, action="append",
                        help="input CSV (repeatable where a kind supports it)")
    parser.add_argument("--out", required=True, help="output image path (.svg/.pdf/.png)")
    parser.add_argument("--title", default="", help="figure title")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(kind=args.kind, inputs=tuple(args.inputs), out=args.out, title=args.title)
    try:
        result = render(spec)
    except (SchemaError, FileNotFoundError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1
    notes = ", ".join(f"{k}={v:.3f}" for k, v in sorted(result.annotations.items()))
    print(f"wrote {result.path}" + (f" ({notes})" if notes else ""))
    return 0


if __name__ == "__main__":
    sys.exit(main())
