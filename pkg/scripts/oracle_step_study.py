"""Representation vs Crank-Nicolson on the boundary-value-one fixture as the
time step shrinks, to show which side dominates the disagreement.

    python scripts/oracle_step_study.py [--steps 256 512 1024]
"""
import argparse

import numpy as np

from heattrace.fdsolve import fd_data_from_triple, fd_solve
from heattrace.fixtures import default_domain, get_fixture
from heattrace.representation import solution_field
from heattrace.verify import _probes


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--fixture", default="boundary-value-one")
    ap.add_argument("--steps", type=int, nargs="+", default=[256, 512, 1024])
    ap.add_argument("--h", type=float, default=1 / 256)
    ap.add_argument("--probes", type=int, default=20)
    args = ap.parse_args()
    d = default_domain()
    tr = get_fixture(args.fixture)
    P = _probes(d, tr.horizon, args.probes, 0)
    ev = solution_field(tr, d).evaluate(P[:, 0], P[:, 1])
    u0, gl, gr = fd_data_from_triple(tr, d, args.h)
    print(f"{args.fixture}: {len(P)} probes, h = {args.h:g}, representation error bound {ev.error.max():.1e}")
    print(f"{'1/k':>6} {'max rel':>10} {'max abs':>10} {'worst t':>8}")
    for n in args.steps:
        fd = fd_solve(d, u0, gl, gr, tr.horizon, args.h, 1.0 / n)(P[:, 0], P[:, 1])
        rel = np.abs(ev.value - fd) / np.abs(fd)
        i = int(np.argmax(rel))
        print(f"{n:>6} {rel.max():>10.3e} {np.abs(ev.value - fd).max():>10.3e} {P[i, 1]:>8.4f}")


if __name__ == "__main__":
    main()
