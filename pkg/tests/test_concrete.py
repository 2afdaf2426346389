from semsearch.concrete import Program, collect_pairs, in_trivial_success, solve
from semsearch.lang import parse_module
from semsearch.reader import parse_term
from semsearch.terms import Struct, Var, make_list

APP = parse_module("""
:- module(app, [app/3, nat/1, loop/1]).
app([], L, L).
app([X|Xs], L, [X|Ys]) :- app(Xs, L, Ys).
nat(0).
nat(N) :- succ(M, N), nat(M).
loop(X) :- loop(X).
""")


def test_all_splits_of_a_list():
    res = solve(APP, parse_term("app(X, Y, [1,2])"))
    assert res.complete
    assert len(res.answers) == 3


def test_occurs_check():
    assert solve(Program(), parse_term("X = f(X)")).answers == []


def test_step_bound_marks_incomplete():
    res = solve(APP, parse_term("loop(a)"), depth_bound=200)
    assert not res.complete and res.answers == []


def test_succ_builtin_both_directions():
    (ans,) = solve(Program(), parse_term("succ(X, 3)")).answers
    assert ans[Var("X")] == Struct(2)
    (ans,) = solve(Program(), parse_term("succ(2, Y)")).answers
    assert ans[Var("Y")] == Struct(3)


def test_functor_builtin():
    (ans,) = solve(Program(), parse_term("functor(f(a, b), N, A)")).answers
    assert ans[Var("N")] == Struct("f") and ans[Var("A")] == Struct(2)


def test_list_property_is_available():
    assert solve(Program(), parse_term("list([a, b])")).answers
    assert not solve(Program(), parse_term("list(a)")).answers


def test_pairs_record_calls_and_successes():
    pairs = collect_pairs(APP, parse_term("app([1], [2], Z)"))
    app = [p for p in pairs if p.pred.name == "app"]
    assert len(app) == 2
    top = app[0] if app[0].success and app[0].success[Var("C")] == make_list([Struct(1), Struct(2)]) else app[1]
    assert top.call[Var("A")] == make_list([Struct(1)])


def test_trivial_success_of_type_tests():
    X = Var("X")
    assert in_trivial_success([parse_term("list(X)")], Program(), {X: make_list([Var("U")])})
    # list(X) with X unbound succeeds only by binding X
    assert in_trivial_success([parse_term("list(X)")], Program(), {X: Var("U")}) is False
    assert in_trivial_success([parse_term("var(X)")], Program(), {X: Var("U")})


def test_trivial_success_inconclusive_on_bound():
    X = Var("X")
    prog = parse_module(":- module(m, [lp/1]).\nlp(X) :- lp(X).\n")
    assert in_trivial_success([parse_term("lp(X)")], prog, {X: Struct("a")}, depth_bound=100) is None
