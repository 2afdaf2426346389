"""Index the bundled corpus (or given paths) and print per-module timings."""

import argparse
import sys
from pathlib import Path

from semsearch.cli import main

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "semsearch" / "fixtures"


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("paths", nargs="*", default=[str(FIXTURES / "corpus"), str(FIXTURES / "extra")])
    ap.add_argument("--cache", default=".semsearch")
    ap.add_argument("--domains", default="shfr,shapes")
    a = ap.parse_args()
    sys.exit(main(["--cache", a.cache, "index", *a.paths, "--domains", a.domains]))
