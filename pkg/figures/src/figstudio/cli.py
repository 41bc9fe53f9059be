"""figures --run DIR --kind KIND --out FILE.png"""

from __future__ import annotations

import argparse
import sys

from .jobs import FigureDataError, FigureJob
from .render import FIGURE_KINDS, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render a figure from a zaklab run directory.",
    )
    parser.add_argument("--run", required=True, help="run directory")
    parser.add_argument("--kind", required=True, choices=FIGURE_KINDS)
    parser.add_argument("--out", required=True, help="output image path (.png)")
    parser.add_argument("--title", default=None)
    parser.add_argument("--dpi", type=int, default=150)
    args = parser.parse_args(argv)

    style = {"dpi": args.dpi}
    if args.title:
        style["title"] = args.title
    try:
        job = FigureJob(args.run, args.kind, args.out, style)
        image, caption = render(job)
    except FigureDataError as exc:
        print(f"figures: {exc}", file=sys.stderr)
        return 1
    print(f"figures: wrote {image} and {caption}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
