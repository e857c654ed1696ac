"""Littlewood-Paley ratio spread over the built-in test family.

    python3 scripts/lp_sweep.py --alpha 1 --k 1 2
"""

import argparse

import numpy as np

from focklab import QuadSpec
from focklab.fockcore import FockParams, lp_ratios, lp_test_family
from focklab.weights import parse_weight


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--p", type=float, nargs="+", default=[1.0, 2.0])
    ap.add_argument("--k", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--weights", nargs="+", default=["constant", "power:gamma=2", "power:gamma=-2", "exp_abs:gamma=1"])
    args = ap.parse_args()
    spec = QuadSpec()
    fam = lp_test_family(args.alpha)
    print(f"{'weight':<18}{'p':>5}{'k':>4}{'min':>12}{'max':>12}{'max/min':>10}")
    for name in args.weights:
        w = parse_weight(name)
        for p in args.p:
            for k in args.k:
                r = np.array([x.ratio for x in lp_ratios(fam, FockParams(p, args.alpha, k), w, spec)])
                print(f"{name:<18}{p:>5g}{k:>4}{r.min():>12.5g}{r.max():>12.5g}{r.max() / r.min():>10.3f}")


if __name__ == "__main__":
    main()
