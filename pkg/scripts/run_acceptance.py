"""Run the nine acceptance criteria and print one line each.

    python scripts/run_acceptance.py [criterion numbers]
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

import test_acceptance as acc  # noqa: E402


def main(argv):
    picked = [int(a) for a in argv] or sorted(acc.CRITERIA)
    failed = 0
    for n in picked:
        ok, _ = acc._run(n)
        failed += not ok
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
