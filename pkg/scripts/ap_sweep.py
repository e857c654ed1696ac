"""Sweep the restricted A_p constant over the weight catalog.

    python3 scripts/ap_sweep.py --p 2 --r 0.5 1 2
"""

import argparse

from focklab import QuadSpec
from focklab.apclass import ap_constant
from focklab.weights import parse_weight

WEIGHTS = ["constant", "power:gamma=2", "power:gamma=-1", "exp_re:gamma=1", "exp_abs:gamma=1", "muck:p=2"]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--r", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    ap.add_argument("--search-radius", type=float, default=4.0)
    ap.add_argument("--weights", nargs="+", default=WEIGHTS)
    args = ap.parse_args()
    spec = QuadSpec()
    print(f"{'weight':<20}" + "".join(f"r={r:<10g}" for r in args.r))
    for name in args.weights:
        w = parse_weight(name)
        vals = [ap_constant(w, args.p, r, max(r, args.search_radius), spec).constant_estimate for r in args.r]
        print(f"{name:<20}" + "".join(f"{v:<12.6g}" for v in vals))


if __name__ == "__main__":
    main()
