import pytest

from semsearch.assertions import (TRUE_DNF, AssertionSyntaxError, Calls, Success, conditions_for,
                                  parse_assertion, to_dnf)
from semsearch.matcher import parse_query
from semsearch.reader import ParseError, parse_term
from semsearch.terms import Struct, Var


def test_pred_assertion_parts():
    a = parse_assertion(':- pred length(L,N) : (list(L), var(N)) => int(N) # "Length".')
    assert a.kind == "pred" and a.name == "length" and a.arity == 2
    assert a.pre == ((parse_term("list(L)"), parse_term("var(N)")),)
    assert a.post == ((parse_term("int(N)"),),)
    assert a.doc == "Length"


def test_true_and_trust_kinds():
    assert parse_assertion(":- true pred p(X) : int(X).").kind == "true_pred"
    assert parse_assertion(":- trust pred p(X) => int(X).").kind == "trust"


def test_dnf_distributes_disjunction():
    d = to_dnf(parse_term("(a(X) ; b(X)), c(X)"))
    assert d == ((Struct("a", (Var("X"),)), Struct("c", (Var("X"),))),
                 (Struct("b", (Var("X"),)), Struct("c", (Var("X"),))))


def test_true_is_empty_conjunction():
    assert to_dnf(Struct("true")) == TRUE_DNF


@pytest.mark.parametrize("bad", [":- pred p(X) : X = 1.", ":- pred p(X, X).", ":- pred p(f(X))."])
def test_malformed_assertions(bad):
    with pytest.raises(ParseError):
        parse_assertion(bad)


def test_conditions_merge_pres_and_split_posts():
    a1 = parse_assertion(":- pred p(L,N) : (list(L), var(N)) => int(N).")
    a2 = parse_assertion(":- pred p(L,N) : (list(L), int(N)).")
    head = Struct("p", (Var("A"), Var("B")))
    calls, succ = conditions_for(head, [a1, a2])
    assert isinstance(calls, Calls) and len(calls.pre) == 2
    assert isinstance(succ, Success) and succ.post == ((Struct("int", (Var("B"),)),),)


def test_conditions_without_pre_make_calls_trivial():
    a = parse_assertion(":- pred p(X) => int(X).")
    calls, _ = conditions_for(Struct("p", (Var("A"),)), [a])
    assert calls.pre == TRUE_DNF


def test_query_forms_agree():
    bare = parse_query(":- pred P(A,B) : (list(A), var(B)) => int(B).")
    wrapped = parse_query("?- findp({ :- pred X(A,B) : (list(A), var(B)) => int(B). }, M:X/2, Residue, checked).")
    assert bare.arity == wrapped.arity == 2
    assert wrapped.required_status == "checked"
    assert [type(c) for c in bare.conditions()] == [Calls, Success]


def test_query_local_regtype_definitions():
    q = parse_query(":- pred P(V) => b(V).\n:- regtype b/1.\nb(b0).\nb(b1).")
    assert ("b", 1, "regtype") in q.prop_decls
    assert len(q.definitions) == 2


def test_query_needs_an_assertion():
    with pytest.raises(ParseError):
        parse_query("b(b0).")


def test_query_heads_must_agree():
    with pytest.raises((ParseError, AssertionSyntaxError)):
        parse_query(":- pred P(A).\n:- pred Q(A,B).")
