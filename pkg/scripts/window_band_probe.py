"""Probe candidate windows n <= m <= f(n) on a family.

Reports violations per window; the windows are user hypotheses and no
conclusion about their sufficiency is drawn.

    python3 scripts/window_band_probe.py --family spiral2d-general:delta=0.5 \
        --windows "2*n" "n*log(n+1)" "n**2" --max-sum 3000
"""

import argparse
import sys

from fekete_lab.sequences import parse_family
from fekete_lab.verify import ConstraintBand, check_subadditivity


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--family", default="spiral2d-general:delta=0.5")
    ap.add_argument("--windows", nargs="+", default=["2*n", "4*n", "n*log(n+1)", "n**1.5", "n**2"])
    ap.add_argument("--max-sum", type=int, default=3000)
    args = ap.parse_args(argv)

    fam = parse_family(args.family)
    for expr in args.windows:
        rep = check_subadditivity(fam, ConstraintBand.window(expr), args.max_sum)
        first = rep.violations[0] if rep.violations else None
        where = f", first at ({first.n}, {first.m})" if first else ""
        print(f"m <= {expr}: {rep.pairs_checked} pairs, {len(rep.violations)} violations{where}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
