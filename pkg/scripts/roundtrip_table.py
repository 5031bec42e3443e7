"""Round trip (triple -> solution -> extracted triple) for each fixture.

    python scripts/roundtrip_table.py [--fixtures eigenfunction corner-atom]
"""
import argparse
import time

from heattrace.fixtures import FIXTURES, default_domain, get_fixture
from heattrace.traces import default_schedule
from heattrace.verify import roundtrip

# fixtures whose extraction makes sense with the default schedule
DEFAULT = ["eigenfunction", "corner-atom", "lateral-cutoff", "boundary-value-one"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--fixtures", nargs="+", default=DEFAULT, choices=sorted(FIXTURES))
    ap.add_argument("--mutation", default=None)
    args = ap.parse_args()
    d = default_domain()
    for name in args.fixtures:
        sched = default_schedule(d, levels=6) if name == "interior-atom" else None
        t0 = time.perf_counter()
        rep = roundtrip(get_fixture(name), d, mutation=args.mutation, sched=sched)
        print(f"== {name} ({time.perf_counter() - t0:.1f} s)")
        print(rep.table())


if __name__ == "__main__":
    main()
