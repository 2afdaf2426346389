import pytest
from hypothesis import given, settings

from semsearch.reader import ParseError, Reader, parse_term
from semsearch.terms import Str, Struct, Var, conj_to_list, format_term, make_list

from strategies import terms


def test_operators_and_precedence():
    t = parse_term("a :- b, c ; d")
    assert t.functor == ":-"
    assert t.args[1].functor == ";"
    assert conj_to_list(t.args[1].args[0]) == [Struct("b"), Struct("c")]


def test_lists_and_tails():
    assert parse_term("[1,2|T]") == make_list([Struct(1), Struct(2)], Var("T"))
    assert parse_term("[]") == Struct("[]")


def test_quoted_atoms_and_strings():
    t = parse_term("f('hello world', \"doc\")")
    assert t.args[0] == Struct("hello world")
    assert t.args[1] == Str("doc")


def test_anonymous_variables_are_distinct():
    t = parse_term("f(_, _)")
    assert t.args[0] != t.args[1]


def test_pair_and_minus_terms():
    assert parse_term("(V,W)") == Struct(",", (Var("V"), Var("W")))
    assert parse_term("K-V") == Struct("-", (Var("K"), Var("V")))


def test_clause_position_is_recorded():
    rcs = Reader("a.\n\n  b :- c.\n").read_all()
    assert [(rc.line, rc.col) for rc in rcs] == [(1, 1), (3, 3)]


def test_comments_are_skipped():
    rcs = Reader("% line\n/* block\n */ a. % tail\n").read_all()
    assert [rc.term for rc in rcs] == [Struct("a")]


@pytest.mark.parametrize("text", ["f(a.", "a :- ).", "f(a,).", "[1,2."])
def test_syntax_errors_carry_position(text):
    with pytest.raises(ParseError) as e:
        Reader(text).read_all()
    assert e.value.line == 1 and e.value.col >= 1


def test_missing_full_stop():
    with pytest.raises(ParseError):
        Reader("a b.").read_all()


@settings(max_examples=300, deadline=None)
@given(terms(2))
def test_format_then_parse_is_identity(t):
    assert parse_term(format_term(t)) == t


def test_format_quotes_when_needed():
    assert format_term(Struct("hello world")) == "'hello world'"
    assert format_term(Struct("[]")) == "[]"
    assert format_term(Struct("-", (Var("K"), Var("V")))) == "K-V"
