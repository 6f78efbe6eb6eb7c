#!/usr/bin/env python3
"""Rationalize the tight-torus profile curve end to end.

Builds the built-in curve h = (cos r, -sin r), certifies contact, replaces
it with a certified piecewise-linear-with-fillets curve under a volume and
period budget, and writes the JSON report plus overlay figure.

Usage:
    python3 scripts/run_tight_torus.py --epsilon 1/20 --out out/tight_torus.json
"""

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from lutzplug.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--epsilon", default="1/20", help="certification budget")
    parser.add_argument(
        "--out",
        default="out/tight_torus.json",
        help="report path (figures land next to it)",
    )
    args = parser.parse_args()
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    return cli_main(
        [
            "rationalize",
            "--builtin",
            "tight-torus",
            "--epsilon",
            str(Fraction(args.epsilon)),
            "--out",
            args.out,
            "--figures",
        ]
    )


if __name__ == "__main__":
    sys.exit(main())
