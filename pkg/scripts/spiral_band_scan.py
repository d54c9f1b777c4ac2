"""Scan the planar spiral on the 1/2..2 ratio band and on the full band.

    python3 scripts/spiral_band_scan.py --max-sum 5000 --out spiral.json
"""

import argparse
import sys

from fekete_lab.report import dumps
from fekete_lab.sequences import spiral_family
from fekete_lab.verify import ConstraintBand, check_subadditivity


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-sum", type=int, default=5000)
    ap.add_argument("--full-max-sum", type=int, default=2000)
    ap.add_argument("--tolerance", type=float, default=1e-12)
    ap.add_argument("--out", default=None)
    args = ap.parse_args(argv)

    fam = spiral_family()
    band = check_subadditivity(fam, ConstraintBand.ratio(0.5, 2), args.max_sum, args.tolerance)
    full = check_subadditivity(fam, ConstraintBand.full(), args.full_max_sum, args.tolerance)
    for rep in (band, full):
        print(rep.summary(), f"({rep.elapsed:.2f}s)")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(dumps({"ratio_band": band.as_dict(), "full_band": full.as_dict()}))
    return 0 if band.ok else 1


if __name__ == "__main__":
    sys.exit(main())
