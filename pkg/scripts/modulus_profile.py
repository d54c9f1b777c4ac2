"""Witness-based upper bounds on the modulus of convexity across spaces."""

import argparse
import sys

from fekete_lab.report import rows_to_csv
from fekete_lab.spaces import hilbert_modulus_closed_form, modulus_profile, parse_space


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--spaces", nargs="+", default=["euclidean:3", "lp:1.5", "lp:3", "convex-l1", "nested"])
    ap.add_argument("--eps", default="0.25,0.5,1.0,1.5")
    ap.add_argument("--samples", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--dim", type=int, default=None)
    args = ap.parse_args(argv)

    eps = [float(e) for e in args.eps.split(",")]
    rows = []
    for text in args.spaces:
        space = parse_space(text)
        for est in modulus_profile(space, eps, args.samples, args.seed, dim=args.dim):
            rows.append((str(space), est.epsilon, est.delta_hat, hilbert_modulus_closed_form(est.epsilon)))
    sys.stdout.write(rows_to_csv(["space", "epsilon", "delta_hat", "hilbert_delta"], rows))
    return 0

if __name__ == "__main__":
    sys.exit(main())
