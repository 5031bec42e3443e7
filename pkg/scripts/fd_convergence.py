"""Observed order of the Crank-Nicolson oracle on exp(-t) sin(x).

    python scripts/fd_convergence.py [--ns 32 64 128 256 512]
"""
import argparse
import math

from heattrace.fixtures import default_domain
from heattrace.verify import fd_convergence_order


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--ns", type=int, nargs="+", default=[32, 64, 128, 256, 512])
    args = ap.parse_args()
    rep = fd_convergence_order(default_domain(), ns=tuple(args.ns))
    errs = rep.extra["errors"]
    print(f"{'n':>6} {'max error':>12} {'order':>7}")
    for i, (n, e) in enumerate(zip(args.ns, errs)):
        order = "" if i == 0 else f"{math.log2(errs[i - 1] / e):7.3f}"
        print(f"{n:>6} {e:>12.4e} {order:>7}")


if __name__ == "__main__":
    main()
