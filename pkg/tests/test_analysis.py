import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from semsearch.analysis import AnalysisConfig, AnalysisError, analyze, preprocess_body
from semsearch.concrete import collect_pairs
from semsearch.lang import base_vars, parse_module
from semsearch.reader import parse_term

from strategies import entry_goals, programs, shapes_member, shfr_member, terms

A, B = base_vars(2)


def member(result, a, theta):
    if result.domain_id == "shfr":
        return shfr_member(a, theta)
    return shapes_member(result.domain, a, theta)


def assert_pairs_covered(result, pairs):
    """Every observed call is described by some triple, and so is every success."""
    for p in pairs:
        if p.pred.module != result.module:
            continue
        ts = result.triples_for(p.pred.name, p.pred.arity)
        calls = [t for t in ts if member(result, t.call, p.call)]
        assert calls, f"call {p.pred} {p.call} not covered"
        if p.success is not None:
            assert any(member(result, t.success, p.success) for t in calls), \
                f"success {p.pred} {p.success} not covered"


def test_fig1_shfr_patterns(modules):
    lists = modules["lists"]
    from semsearch.analysis import ImportsDB

    r = analyze(modules["fig1"], "shfr", imports_db=ImportsDB.from_modules([lists]))
    (gen,) = r.triples_for("gen_list", 2)
    assert gen.call.payload[1] == frozenset({A, B})  # both free at entry
    assert gen.success.payload == (frozenset({frozenset({A})}), frozenset())  # N ground, L any
    (chk,) = r.triples_for("check_length", 2)
    assert B not in frozenset().union(*chk.call.payload[0])  # N ground on entry


def test_simple_shapes_successes(modules):
    r = analyze(modules["simple"], "shapes")
    table = r.domain.table
    succ = {t.pred.name: t.success.payload[0] for t in r.triples}
    assert succ["perfect"] == "b"
    assert table.leq(succ["reduced"], "b") and not table.leq("b", succ["reduced"])
    assert table.is_empty(table.glb(succ["outb"], "b"))
    assert not table.leq(succ["mixed"], "b")
    assert succ["hard"] == "term"


def test_lists_length_success_is_integer(modules):
    r = analyze(modules["lists"], "shapes")
    (t,) = r.triples_for("length", 2)
    assert t.success.payload[1] == "int"


def test_oracle_pairs_are_covered_fig1(modules):
    from semsearch.analysis import ImportsDB
    from semsearch.concrete import Program

    prog = Program([modules["fig1"], modules["lists"]])
    for d in ("shfr", "shapes"):
        r = analyze(modules["fig1"], d, imports_db=ImportsDB.from_modules([modules["lists"]]))
        assert_pairs_covered(r, collect_pairs(prog, parse_term("check_length([a,b], 2)")))


@pytest.mark.parametrize("name", ["lists", "named_graphs", "ugraphs"])
@pytest.mark.parametrize("domain", ["shfr", "shapes"])
def test_oracle_pairs_are_covered_corpus(modules, name, domain):
    m = modules[name]
    r = analyze(m, domain)
    goals = {
        "lists": ["length([a,b,c], N)", "append([1], [2,3], Z)", "reverse([a,b], R)", "nth(2, [a,b], E)"],
        "named_graphs": ["complete_graph(3, G)", "cycle_graph(2, G)"],
        "ugraphs": ["add_vertices([a-[b], b-[]], [c], G)", "del_edges([a-[b], b-[]], [a-b], G)",
                    "neighbors(a, [a-[b]], N)"],
    }[name]
    for g in goals:
        assert_pairs_covered(r, collect_pairs(m, parse_term(g), depth_bound=3000))


def test_preprocess_distinct_call_arguments():
    import itertools

    items = preprocess_body((parse_term("p(X, f(X))"),), itertools.count())
    kinds = [type(i).__name__ for i in items]
    assert kinds[-1] == "Call" and kinds.count("Eq") >= 1


def test_unknown_predicate_is_an_error():
    m = parse_module(":- module(m, [p/1]).\np(X) :- nowhere(X).\n")
    with pytest.raises(AnalysisError):
        analyze(m, "shfr")


def test_result_is_deterministic(modules):
    r1 = analyze(modules["ugraphs"], "shapes")
    r2 = analyze(modules["ugraphs"], "shapes")
    assert r1 == r2


def test_variant_cap_respected(modules):
    cfg = AnalysisConfig(max_variants=2)
    r = analyze(modules["ugraphs"], "shfr", config=cfg)
    from collections import Counter

    assert max(Counter(t.pred for t in r.triples).values()) <= 2


# -- safety on random programs ------------------------------------------------------------


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(programs(entries=True), st.data())
def test_analysis_safety_random_programs(src, data):
    m = parse_module(src)
    results = [analyze(m, d) for d in ("shfr", "shapes")]
    for p in m.exports:
        cands = [[data.draw(terms(1)) for _ in range(p.arity)] for _ in range(4)]
        for goal in entry_goals(m, p, cands):
            pairs = collect_pairs(m, goal, depth_bound=400)
            for r in results:
                assert_pairs_covered(r, pairs)
