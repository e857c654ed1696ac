"""Print the multiplier classification over a grid of (p, q, beta).

    python3 scripts/multiplier_table.py --alpha 1
"""

import argparse

from focklab.carleson_mult import mult_classify


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--betas", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    ap.add_argument("--exponents", type=float, nargs="+", default=[1.0, 2.0, 3.0])
    args = ap.parse_args()
    print(f"{'p':>4}{'q':>4}{'beta':>6}  {'verdict':<26}exponent")
    for beta in args.betas:
        for p in args.exponents:
            for q in args.exponents:
                c = mult_classify(p, q, args.alpha, beta)
                ex = "" if c.exponent is None else f"{c.exponent:.4g}"
                print(f"{p:>4g}{q:>4g}{beta:>6g}  {c.verdict:<26}{ex}")


if __name__ == "__main__":
    main()
