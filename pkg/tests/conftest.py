from pathlib import Path

import pytest

from semsearch.analysis import ImportsDB, analyze
from semsearch.lang import load_module
from semsearch.matcher import CorpusModule

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "semsearch" / "fixtures"
CORPUS = FIXTURES / "corpus"
EXTRA = FIXTURES / "extra"
DATA = Path(__file__).resolve().parent / "data"
DOMAINS = ("shfr", "shapes")


def build_corpus(paths):
    mods = {}
    for p in paths:
        m = load_module(p)
        mods[m.name] = m
    out = []
    for m in mods.values():
        db = ImportsDB.from_modules([mods[i] for i in m.imports if i in mods])
        out.append(CorpusModule(m, {d: analyze(m, d, imports_db=db) for d in DOMAINS}, db))
    return out


@pytest.fixture(scope="session")
def small_corpus():
    """The five reference modules analyzed in memory."""
    return build_corpus(sorted(CORPUS.glob("*.pl")))


@pytest.fixture(scope="session")
def modules():
    return {p.stem: load_module(p) for p in sorted(CORPUS.glob("*.pl"))}
