"""Interval heat kernel across time lags: both series forms, the value used,
and the certified truncation bound.

    python scripts/kernel_table.py [--x 1.0 --y 1.2]
"""
import argparse

import numpy as np

from heattrace.kernels import green_1d, normal_1d


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--x", type=float, default=1.0)
    ap.add_argument("--y", type=float, default=1.2)
    ap.add_argument("--tol", type=float, default=1e-10)
    args = ap.parse_args()
    print(f"G({args.x}, {args.y}; tau) and the left normal kernel at x = {args.x}")
    print(f"{'tau':>9} {'spectral':>14} {'image':>14} {'|diff|':>9} {'bound':>9} {'normal':>14}")
    for tau in np.geomspace(1e-3, 2.0, 12):
        s = green_1d(args.x, args.y, tau, tol=args.tol, switch=0.0)
        i = green_1d(args.x, args.y, tau, tol=args.tol, switch=10.0)
        n = normal_1d(args.x, tau, tol=args.tol)
        print(f"{tau:9.3e} {float(s.value):14.8e} {float(i.value):14.8e} {abs(float(s.value - i.value)):9.1e} "
              f"{float(s.error + i.error):9.1e} {float(n.value):14.8e}")


if __name__ == "__main__":
    main()
