"""One test per acceptance criterion, at the stated tolerances."""

import filecmp
import time

from semsearch.analysis import ImportsDB, analyze
from semsearch.cli import main
from semsearch.lang import load_module
from semsearch.matcher import CHECK, CHECKED, FALSE, CorpusModule, FindOptions, findp, parse_query
from semsearch.store import Store, index_corpus

from conftest import CORPUS, DOMAINS, EXTRA, FIXTURES, build_corpus

QUERIES = FIXTURES / "queries"


def q(name):
    return parse_query((QUERIES / f"{name}.pl").read_text())


def by_name(results):
    return {r.pred.name: r for r in results}


def fig1_corpus(domains):
    lists = load_module(CORPUS / "lists.pl")
    fig1 = load_module(CORPUS / "fig1.pl")
    db = ImportsDB.from_modules([lists])
    return [CorpusModule(fig1, {d: analyze(fig1, d, imports_db=db) for d in domains}, db)]


def run_counted(test_fn):
    """Run a hypothesis test and return how many examples it executed."""
    inner = test_fn.hypothesis.inner_test
    count = [0]

    def counting(*a, **kw):
        count[0] += 1
        return inner(*a, **kw)

    test_fn.hypothesis.inner_test = counting
    try:
        test_fn()
    finally:
        test_fn.hypothesis.inner_test = inner
    return count[0]


def test_criterion_1_calls_condition_shfr():
    t0 = time.perf_counter()
    got = {n: r.status for n, r in by_name(findp(q("calls_free"), fig1_corpus(("shfr",)),
                                                 FindOptions(domains=("shfr",)))).items()}
    elapsed = time.perf_counter() - t0
    assert got == {"gen_list": CHECKED, "check_length": FALSE, "my_length": CHECK, "get_length": CHECK}
    assert elapsed < 5


def test_criterion_2_success_condition_shapes():
    t0 = time.perf_counter()
    simple = load_module(CORPUS / "simple.pl")
    cm = CorpusModule(simple, {"shapes": analyze(simple, "shapes")})
    rs = by_name(findp(q("success_b"), [cm], FindOptions(domains=("shapes",))))
    elapsed = time.perf_counter() - t0
    got = {n: r.residue[1].status for n, r in rs.items()}
    assert got == {"perfect": CHECKED, "reduced": CHECKED, "outb": FALSE, "mixed": CHECK, "hard": CHECK}
    assert elapsed < 5


def test_criterion_3_combined_domains():
    rs = by_name(findp(q("calls_list_num"), fig1_corpus(DOMAINS)))
    combined = {n: r.status for n, r in rs.items()}
    per_domain = {n: {d: v.status for d, v in r.residue[0].verdicts} for n, r in rs.items()}
    assert combined == {"gen_list": FALSE, "get_length": FALSE, "check_length": CHECKED, "my_length": CHECK}
    assert per_domain == {
        "gen_list": {"shapes": CHECK, "shfr": FALSE},
        "get_length": {"shapes": CHECK, "shfr": FALSE},
        "check_length": {"shapes": CHECKED, "shfr": CHECK},
        "my_length": {"shapes": CHECK, "shfr": CHECK},
    }


def test_criterion_4_findp_end_to_end():
    lists_only = build_corpus([CORPUS / "lists.pl"])
    length = {str(r.pred) for r in findp(q("length"), lists_only)}
    assert length == {"lists:length/2"}

    corpus = build_corpus(sorted(CORPUS.glob("*.pl")) + sorted(EXTRA.glob("*.pl")))
    math = {str(r.pred) for r in findp(q("math_graph"), corpus, FindOptions(required_status=CHECKED))}
    assert math == {"named_graphs:complete_graph/2", "named_graphs:cycle_graph/2"}

    # success condition C2 holding with an actual success (vacuous matches carry no_success)
    refined = findp(q("al_graph"), corpus, FindOptions(refine=True))
    holds = {str(r.pred) for r in refined
             if r.residue[1].status == CHECKED
             and not any(v.note == "no_success" for _, v in r.residue[1].verdicts if v.status == CHECKED)}
    assert holds == {"ugraphs:add_vertices/3", "ugraphs:del_vertices/3",
                     "ugraphs:add_edges/3", "ugraphs:del_edges/3"}


def test_criterion_5_property_suites():
    import test_analysis
    import test_matcher
    import test_shapes
    import test_shfr

    t0 = time.perf_counter()
    counts = {
        "shfr lattice": run_counted(test_shfr.test_lattice_laws),
        "shapes lattice": run_counted(test_shapes.test_lattice_laws),
        "shfr sandwich": run_counted(test_shfr.test_concretization_sandwich),
        "shfr amgu": run_counted(test_shfr.test_amgu_safety),
        "shapes sandwich": run_counted(test_shapes.test_concretization_sandwich),
        "shapes amgu": run_counted(test_shapes.test_amgu_safety),
        "analysis safety": run_counted(test_analysis.test_analysis_safety_random_programs),
        "matcher soundness": run_counted(test_matcher.test_matcher_soundness_random),
    }
    elapsed = time.perf_counter() - t0
    assert counts["shfr lattice"] >= 1000 and counts["shapes lattice"] >= 1000
    assert counts["analysis safety"] >= 50 and counts["matcher soundness"] >= 50
    assert min(counts.values()) > 0
    assert elapsed < 600


def test_criterion_6_performance(tmp_path):
    paths = sorted(CORPUS.glob("*.pl")) + sorted(EXTRA.glob("*.pl"))
    assert len(paths) >= 15
    t0 = time.perf_counter()
    idx = index_corpus(paths, DOMAINS, tmp_path)
    index_time = time.perf_counter() - t0
    assert not idx.failures and len(idx.entries) == len(paths)
    assert index_time < 60

    store = Store(tmp_path)
    corpus = store.corpus(DOMAINS)
    list(findp(q("calls_free"), corpus))  # warm up
    t0 = time.perf_counter()
    rs = list(findp(q("length"), store.corpus(DOMAINS)))
    assert rs and time.perf_counter() - t0 < 5

    total = sum(p.stat().st_size for p in tmp_path.glob("*.dump"))
    assert total < 5 * 1024 * 1024


def test_criterion_7_determinism(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for cache in (a, b):
        assert main(["--cache", str(cache), "index", str(CORPUS), str(EXTRA)]) == 0
    capsys.readouterr()
    dumps = sorted(p.name for p in a.glob("*.dump"))
    match, mismatch, errors = filecmp.cmpfiles(a, b, dumps + ["index.txt"], shallow=False)
    assert not mismatch and not errors and len(match) == len(dumps) + 1

    outs = []
    for _ in range(2):
        main(["--cache", str(a), "find", str(QUERIES / "al_graph.pl"), "--refine", "--format", "machine"])
        outs.append(capsys.readouterr().out.encode())
    assert outs[0] == outs[1] and outs[0]
