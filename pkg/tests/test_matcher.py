import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from semsearch.analysis import analyze
from semsearch.concrete import Program, collect_pairs, in_trivial_success
from semsearch.domains.props import PropContext, abstract_prop
from semsearch.domains.shapes import Shapes
from semsearch.lang import parse_module
from semsearch.matcher import (CHECK, CHECKED, FALSE, ConditionStatus, CorpusModule, FindOptions,
                               SoundnessError, combine_domains, findp, overall_status, parse_query)
from semsearch.terms import Struct, Var

from strategies import VARS, entry_goals, programs, shapes_member, shfr, shfr_member, substitutions, terms

X, Y, Z = VARS


def statuses(results):
    return {f"{r.pred.module}:{r.pred.name}/{r.pred.arity}": r.status for r in results}


def test_combine_prefers_false_then_checked():
    c, f, u = ConditionStatus(CHECKED), ConditionStatus(FALSE), ConditionStatus(CHECK)
    assert combine_domains([("shfr", u), ("shapes", f)]) == FALSE
    assert combine_domains([("shfr", c), ("shapes", u)]) == CHECKED
    assert combine_domains([("shfr", u), ("shapes", u)]) == CHECK


def test_contradiction_raises():
    with pytest.raises(SoundnessError):
        combine_domains([("shfr", ConditionStatus(CHECKED)), ("shapes", ConditionStatus(FALSE))])


def test_vacuous_success_does_not_contradict():
    vac = ConditionStatus(CHECKED, "no_success")
    assert combine_domains([("shfr", vac), ("shapes", ConditionStatus(FALSE))]) == FALSE


def test_overall_status():
    assert overall_status([CHECKED, CHECKED]) == CHECKED
    assert overall_status([CHECKED, CHECK]) == CHECK
    assert overall_status([CHECK, FALSE]) == FALSE


def test_results_are_ordered(small_corpus):
    q = parse_query(":- pred P(L, Size) : (var(L), var(Size)).")
    rs = list(findp(q, small_corpus))
    order = {CHECKED: 0, CHECK: 1, FALSE: 2}
    keys = [(order[r.status], r.pred.module, r.pred.name) for r in rs]
    assert keys == sorted(keys)


def test_props_are_not_candidates(small_corpus):
    q = parse_query(":- pred P(V) : term(V) => b(V).\n:- regtype b/1.\nb(b0).\nb(b1).")
    assert "simple:b/1" not in statuses(findp(q, small_corpus))


def test_required_status_filters(small_corpus):
    q = parse_query(":- pred P(L, Size) : (var(L), var(Size)).")
    rs = list(findp(q, small_corpus, FindOptions(required_status=CHECKED)))
    assert rs and all(r.status == CHECKED for r in rs)


def test_keywords_are_anded(small_corpus):
    q = parse_query(":- pred P(L, Size).")
    rs = statuses(findp(q, small_corpus, FindOptions(keywords=("list", "random"))))
    assert list(rs) == ["fig1:gen_list/2"]
    assert not list(findp(q, small_corpus, FindOptions(keywords=("list", "nope"))))


def test_unknown_property_gives_check(small_corpus):
    q = parse_query(":- pred P(A) => mystery(A).")
    rs = list(findp(q, small_corpus))
    assert rs and all(r.status != CHECKED for r in rs)
    assert any(v.note == "unknown_property" for r in rs for e in r.residue for _, v in e.verdicts)


def test_single_domain_search(small_corpus):
    q = parse_query(":- pred P(L, Size) : (var(L), var(Size)).")
    rs = statuses(findp(q, small_corpus, FindOptions(domains=("shfr",))))
    assert rs["fig1:gen_list/2"] == CHECKED


def test_residue_renders_per_domain(small_corpus):
    q = parse_query(":- pred P(L, Size) : (var(L), var(Size)).")
    r = next(r for r in findp(q, small_corpus) if r.pred.name == "gen_list")
    assert str(r.residue[0]) == "calls(P(L,Size), (var(L), var(Size)))  [shfr: checked] [shapes: check] => checked"


# -- property approximations against the concrete definition -------------------------------

PROP_NAMES = ("var", "nonvar", "ground", "atm", "int", "atomic", "term", "list")


def conjunctions(vars=(X, Y)):
    lit = st.builds(lambda n, v: Struct(n, (v,)), st.sampled_from(PROP_NAMES), st.sampled_from(vars))
    return st.lists(lit, min_size=1, max_size=3).map(tuple)


def dmember(dom, a, theta):
    return shfr_member(a, theta) if dom.name == "shfr" else shapes_member(dom, a, theta)


@settings(max_examples=400, deadline=None)
@given(conjunctions(), substitutions(vars=(X, Y)), st.sampled_from(["shfr", "shapes"]))
def test_property_over_and_under_sandwich(conj, theta, dname):
    dom = shfr if dname == "shfr" else Shapes()
    ctx = PropContext.from_modules([])
    ap = abstract_prop(conj, dom, (X, Y), ctx)
    holds = in_trivial_success(list(conj), Program(), theta)
    if holds:
        assert dmember(dom, ap.over, theta)
    if ap.under is not None and dmember(dom, ap.under, theta):
        assert holds is not False


# -- end-to-end soundness on random programs ----------------------------------------------------


def queries(arity):
    vars = (Var("A"), Var("B"))[:arity]

    @st.composite
    def build(draw):
        pre = draw(conjunctions(vars))
        post = draw(conjunctions(vars))
        head = "P(" + ",".join(v.name for v in vars) + ")"
        fmt = lambda c: "(" + ", ".join(f"{l.functor}({l.args[0].name})" for l in c) + ")"
        return f":- pred {head} : {fmt(pre)} => {fmt(post)}.", vars, pre, post

    return build()


def holds(conj, vars, args):
    return in_trivial_success(list(conj), Program(), dict(zip(vars, args)))


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(programs(entries=True), st.data())
def test_matcher_soundness_random(src, data):
    m = parse_module(src)
    cm = CorpusModule(m, {d: analyze(m, d) for d in ("shfr", "shapes")})
    arity = data.draw(st.sampled_from(sorted({p.arity for p in m.exports} & {1, 2})))
    text, vars, pre, post = data.draw(queries(arity))
    q = parse_query(text)
    results = list(findp(q, [cm]))  # raises SoundnessError on a checked/false contradiction
    for r in results:
        calls, succ = r.residue
        observed_calls, observed = [], []
        cands = [[data.draw(terms(1)) for _ in range(arity)] for _ in range(6)]
        for goal in entry_goals(m, r.pred, cands):
            for p in collect_pairs(m, goal, depth_bound=300):
                if p.pred == r.pred:
                    observed_calls.append(p.args("call"))
                    if p.success is not None:
                        observed.append((p.args("call"), p.args("success")))
        if calls.status == CHECKED:
            assert all(holds(pre, vars, c) is not False for c in observed_calls)
        if calls.status == FALSE:
            assert all(holds(pre, vars, c) is not True for c in observed_calls)
        if succ.status == CHECKED:
            for c, s in observed:
                if holds(pre, vars, c):
                    assert holds(post, vars, s) is not False
