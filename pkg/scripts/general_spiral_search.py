"""Search the generalized spiral r_n = n(1 + (ln n)^-d), theta_n = (ln n)^d for
full-band violations, keeping only pairs with both indices at or past the start.
"""

import argparse
import sys

from fekete_lab.sequences import spiral_general_family
from fekete_lab.verify import ConstraintBand, check_subadditivity


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--deltas", default="0.25,0.5,0.75,1.0")
    ap.add_argument("--start", type=int, default=3)
    ap.add_argument("--max-sum", type=int, default=2000)
    ap.add_argument("--show", type=int, default=5)
    args = ap.parse_args(argv)

    for d in (float(x) for x in args.deltas.split(",")):
        fam = spiral_general_family(d, args.start)
        ratio = check_subadditivity(fam, ConstraintBand.ratio(0.5, 2), args.max_sum)
        full = check_subadditivity(fam, ConstraintBand.full(), args.max_sum)
        genuine = [v for v in full.violations if v.n >= args.start]
        print(f"delta={d:g}: ratio band {len(ratio.violations)} violations, "
              f"full band {len(full.violations)} ({len(genuine)} with n >= start)")
        for v in genuine[: args.show]:
            print(f"    n={v.n} m={v.m} margin={v.margin:.4g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
