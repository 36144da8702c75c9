"""Run the acceptance criteria and print one line per criterion."""
import argparse
import sys

from cylbem.acceptance import AcceptanceConfig, run_all

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--only", type=int, nargs="*", help="criterion numbers")
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    results = run_all(AcceptanceConfig(seed=a.seed), only=set(a.only) if a.only else None, echo=print)
    sys.exit(0 if all(r.passed for r in results) else 1)
