"""Bounded vs. growing Carleson constructions across Sobolev orders n.

    python3 scripts/carleson_sweep.py --p 2 --q 2
"""

import argparse

from focklab import QuadSpec
from focklab.carleson_mult import PositiveMeasure, carleson_diagnose
from focklab.weights import derive_weight, make_weight


def density(base, q, alpha, n, p):
    w = derive_weight(base, "distort", n * p) if n else base
    return PositiveMeasure.with_density(w, -q * alpha / 2)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--q", type=float, default=2.0)
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--orders", type=int, nargs="+", default=[-1, 0, 1])
    ap.add_argument("--radii", type=float, nargs=2, default=[2.0, 6.0])
    args = ap.parse_args()
    spec = QuadSpec()
    one = make_weight("constant")
    bases = {"gaussian": one, "gaussian*(1+|z|)^3": make_weight("power", {"gamma": 3})}
    print(f"{'measure':<22}{'n':>3}{'condition':>24}{'empirical':>24}  verdict")
    for label, base in bases.items():
        for n in args.orders:
            rep = carleson_diagnose(
                density(base, args.q, args.alpha, n, args.p), args.p, args.q, args.alpha, one, n, spec, radii=tuple(args.radii)
            )
            c, e = rep.evidence["condition"], rep.evidence["empirical"]
            print(f"{label:<22}{n:>3}{c[0]:>12.4g}{c[1]:>12.4g}{e[0]:>12.4g}{e[1]:>12.4g}  {rep.verdict}")


if __name__ == "__main__":
    main()
