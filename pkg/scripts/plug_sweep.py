#!/usr/bin/env python3
"""Verify the plug contract across sector counts and tabulate the results.

For each sector count n this builds the desk-scale plug, runs the full
contract (boundary identity, unit Jacobian determinant, generating
function, Morse invariance, orbit census, minimal action) and prints one
table row.  Volumes shrink as n grows while every contract stays green.

Usage:
    python3 scripts/plug_sweep.py --sectors 4 8 16 [--out out/sweep.json]
"""

import argparse
import sys
import time
from pathlib import Path

from lutzplug.jsonio import canonical_dumps
from lutzplug.plug import PlugSpec, build_plug, verify_plug_contract

COLUMNS = (
    ("n", 4),
    ("passed", 7),
    ("volume", 10),
    ("det_err", 10),
    ("dtau_res", 10),
    ("min_action", 11),
    ("census", 12),
    ("seconds", 8),
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sectors", type=int, nargs="+", default=[4, 8, 16])
    parser.add_argument("--out", help="optional JSON summary path")
    args = parser.parse_args()

    header = "  ".join(name.ljust(width) for name, width in COLUMNS)
    print(header)
    print("-" * len(header))

    rows = []
    all_passed = True
    for n in args.sectors:
        start = time.perf_counter()
        plug = build_plug(PlugSpec(n=n))
        contract = verify_plug_contract(plug)
        elapsed = time.perf_counter() - start
        all_passed &= contract.passed
        cells = (
            str(n),
            "yes" if contract.passed else "NO",
            f"{contract.volume:.5f}",
            f"{contract.max_det_error:.2e}",
            f"{contract.dtau_residual:.2e}",
            f"{contract.min_action:.6f}",
            "/".join(map(str, contract.census_counts)),
            f"{elapsed:.1f}",
        )
        print("  ".join(c.ljust(w) for c, (_, w) in zip(cells, COLUMNS)))
        rows.append(
            {
                "n": n,
                "passed": contract.passed,
                "volume": contract.volume,
                "max_det_error": contract.max_det_error,
                "boundary_error": contract.boundary_error,
                "dtau_residual": contract.dtau_residual,
                "invariance_error": contract.invariance_error,
                "min_action": contract.min_action,
                "census": list(contract.census_counts),
                "failures": contract.failures,
            }
        )

    if args.out:
        path = Path(args.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(canonical_dumps({"kind": "plug_sweep", "rows": rows}))
        print(f"\nwrote {path}")

    return 0 if all_passed else 1


if __name__ == "__main__":
    sys.exit(main())
