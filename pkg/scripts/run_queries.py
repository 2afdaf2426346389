"""Run every fixture query against an indexed cache.

Index first with scripts/index_corpus.py. Queries without an explicit
status run unfiltered; pass --refine to reanalyze undecided candidates.
"""

import argparse
from pathlib import Path

from semsearch.cli import main

QUERIES = Path(__file__).resolve().parents[1] / "src" / "semsearch" / "fixtures" / "queries"


def run(cache, refine=False, fmt="human"):
    codes = {}
    for q in sorted(QUERIES.glob("*.pl")):
        print(f"== {q.stem}")
        args = ["--cache", cache, "find", str(q), "--format", fmt]
        codes[q.stem] = main(args + (["--refine"] if refine else []))
    return codes


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cache", default=".semsearch")
    ap.add_argument("--refine", action="store_true")
    ap.add_argument("--format", choices=("human", "machine"), default="human")
    a = ap.parse_args()
    codes = run(a.cache, a.refine, a.format)
    print("exit codes:", " ".join(f"{k}={v}" for k, v in codes.items()))
