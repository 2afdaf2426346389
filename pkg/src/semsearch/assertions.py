"""Assertions, assertion conditions and predicate queries.

A ``pred`` assertion ``Head : Pre => Post`` yields one calls condition for the
predicate (the disjunction of all preconditions) and one success condition per
assertion that has a postcondition.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .reader import ParseError, Reader
from .terms import Str, Struct, Term, Var, format_term, iter_vars, substitute

# A formula in disjunctive normal form: a tuple of conjunctions of literals.
# ((),) is ``true``; () is ``fail`` (never produced by the parser).
DNF = tuple[tuple[Struct, ...], ...]
TRUE_DNF: DNF = ((),)

ASSERTION_KINDS = ("pred", "true_pred", "trust")

# literal functors that are not state properties
_NON_PROPERTY = {"=", ",", ";", "->", "!", ":-", "\\=", "is"}


class AssertionSyntaxError(Exception):
    """Malformed assertion."""


def to_dnf(t: Term) -> DNF:
    """Distribute ``;`` over ``,``; validates that every literal is a property atom."""
    if isinstance(t, Struct) and t.functor == ";" and t.arity == 2:
        return to_dnf(t.args[0]) + to_dnf(t.args[1])
    if isinstance(t, Struct) and t.functor == "," and t.arity == 2:
        out = []
        for a, b in itertools.product(to_dnf(t.args[0]), to_dnf(t.args[1])):
            out.append(a + b)
        return tuple(out)
    if isinstance(t, Struct) and t.functor == "true" and not t.args:
        return TRUE_DNF
    if not isinstance(t, Struct) or isinstance(t.functor, int) or t.functor in _NON_PROPERTY:
        raise AssertionSyntaxError(f"not a property literal: {format_term(t)}")
    if t.functor == "$apply":
        raise AssertionSyntaxError(f"not a property literal: {format_term(t)}")
    return ((t,),)


def dnf_vars(dnf: DNF) -> list[Var]:
    seen: dict[Var, None] = {}
    for conj in dnf:
        for lit in conj:
            for a in lit.args:
                for v in iter_vars(a):
                    seen.setdefault(v, None)
    return list(seen)


def rename_dnf(dnf: DNF, mapping: dict[Var, Term]) -> DNF:
    return tuple(tuple(substitute(lit, mapping) for lit in conj) for conj in dnf)


def format_conj(conj: Sequence[Term]) -> str:
    if not conj:
        return "true"
    if len(conj) == 1:
        return format_term(conj[0], prec=999)
    return "(" + ", ".join(format_term(lit, prec=999) for lit in conj) + ")"


def format_dnf(dnf: DNF) -> str:
    if len(dnf) == 1:
        return format_conj(dnf[0])
    return "(" + " ; ".join(format_conj(c) for c in dnf) + ")"


@dataclass(frozen=True)
class Assertion:
    kind: str
    head: Struct
    pre: DNF = TRUE_DNF
    post: DNF = TRUE_DNF
    doc: Optional[str] = None
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    @property
    def is_query(self) -> bool:
        return self.head.functor == "$apply"

    @property
    def name(self) -> Optional[str]:
        return None if self.is_query else self.head.functor

    @property
    def args(self) -> tuple[Var, ...]:
        return self.head.args[1:] if self.is_query else self.head.args

    @property
    def arity(self) -> int:
        return len(self.args)

    def renamed(self, new_args: Sequence[Var]) -> "Assertion":
        """The same assertion over a different (positional) head variable sequence."""
        mapping = dict(zip(self.args, new_args))
        head = Struct(self.head.functor, (self.head.args[0], *new_args)) if self.is_query \
            else Struct(self.head.functor, tuple(new_args))
        return Assertion(self.kind, head, rename_dnf(self.pre, mapping),
                         rename_dnf(self.post, mapping), self.doc, self.line, self.col)

    def __str__(self) -> str:
        prefix = {"pred": "pred", "true_pred": "true pred", "trust": "trust pred"}[self.kind]
        s = f":- {prefix} {format_term(self.head, prec=199)}"
        if self.pre != TRUE_DNF:
            s += f" : {format_dnf(self.pre)}"
        if self.post != TRUE_DNF:
            s += f" => {format_dnf(self.post)}"
        if self.doc is not None:
            s += " # " + str(Str(self.doc))
        return s + "."


def assertion_from_term(t: Term, line: int = 0, col: int = 0) -> Optional[Assertion]:
    """Interpret the body of a ``:- ...`` directive; None if it is not an assertion."""
    kind = None
    if isinstance(t, Struct) and t.arity == 1 and t.functor == "pred":
        kind, body = "pred", t.args[0]
    elif isinstance(t, Struct) and t.arity == 1 and t.functor in ("true", "trust", "check"):
        inner = t.args[0]
        if isinstance(inner, Struct) and inner.functor == "pred" and inner.arity == 1:
            kind = {"true": "true_pred", "trust": "trust", "check": "pred"}[t.functor]
            body = inner.args[0]
    if kind is None:
        return None
    doc = None
    if isinstance(body, Struct) and body.functor == "#" and body.arity == 2:
        body, d = body.args
        if not isinstance(d, Str):
            raise AssertionSyntaxError("doc text after '#' must be a string")
        doc = d.text
    post: DNF = TRUE_DNF
    pre: DNF = TRUE_DNF
    if isinstance(body, Struct) and body.functor == "=>" and body.arity == 2:
        body, p = body.args
        post = to_dnf(p)
    if isinstance(body, Struct) and body.functor == ":" and body.arity == 2:
        body, p = body.args
        pre = to_dnf(p)
    head = body
    if not isinstance(head, Struct) or isinstance(head.functor, int):
        raise AssertionSyntaxError(f"bad assertion head: {format_term(head)}")
    args = head.args[1:] if head.functor == "$apply" else head.args
    if not all(isinstance(a, Var) for a in args) or len(set(args)) != len(args):
        raise AssertionSyntaxError(f"assertion head arguments must be distinct variables: {format_term(head)}")
    return Assertion(kind, head, pre, post, doc, line, col)


def parse_assertion(text: str) -> Assertion:
    """Parse one assertion in source syntax (``:- pred ...``)."""
    src = text.strip()
    if not src.endswith("."):
        src += " ."
    reader = Reader(src)
    rc = reader.read_clause()
    if not reader.at_eof():
        raise reader.error("trailing input after assertion")
    t = rc.term
    if isinstance(t, Struct) and t.functor == ":-" and t.arity == 1:
        t = t.args[0]
    try:
        a = assertion_from_term(t, rc.line, rc.col)
    except AssertionSyntaxError as e:
        raise ParseError(str(e), rc.line, rc.col) from None
    if a is None:
        raise ParseError("not an assertion", rc.line, rc.col)
    return a


# -- assertion conditions ------------------------------------------------------


@dataclass(frozen=True)
class Calls:
    head: Struct
    pre: DNF

    kind = "calls"

    def __str__(self) -> str:
        return f"calls({format_term(self.head, prec=999)}, {format_dnf(self.pre)})"


@dataclass(frozen=True)
class Success:
    head: Struct
    pre: DNF
    post: DNF

    kind = "success"

    def __str__(self) -> str:
        return (f"success({format_term(self.head, prec=999)}, {format_dnf(self.pre)}, "
                f"{format_dnf(self.post)})")


AssertionCondition = Union[Calls, Success]


def conditions_for(head: Struct, assertions: Sequence[Assertion]) -> list[AssertionCondition]:
    """The calls condition plus one success condition per assertion with a Post."""
    if not assertions:
        return []
    head_args = head.args[1:] if head.functor == "$apply" else head.args
    pres: list[tuple[Struct, ...]] = []
    successes: list[AssertionCondition] = []
    for a in assertions:
        if a.arity != len(head_args):
            raise AssertionSyntaxError(f"arity mismatch: {a} against {format_term(head)}")
        r = a.renamed(head_args)
        for conj in r.pre:
            if conj not in pres:
                pres.append(conj)
        if r.post != TRUE_DNF:
            successes.append(Success(head, r.pre, r.post))
    pre: DNF = TRUE_DNF if () in pres else tuple(pres)
    return [Calls(head, pre), *successes]


@dataclass(frozen=True)
class PredicateQuery:
    assertions: tuple[Assertion, ...]
    definitions: tuple = ()  # Clauses of query-local props/regtypes
    prop_decls: tuple = ()   # (name, arity, kind)
    required_status: Optional[str] = None
    keywords: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.assertions:
            raise AssertionSyntaxError("a predicate query needs at least one query assertion")
        heads = {(a.head.args[0] if a.is_query else None, a.arity) for a in self.assertions}
        if len(heads) != 1 or any(not a.is_query for a in self.assertions):
            raise AssertionSyntaxError("query assertions must share one head variable and one arity")

    @property
    def arity(self) -> int:
        return self.assertions[0].arity

    @property
    def head(self) -> Struct:
        return self.assertions[0].head

    def conditions(self) -> list[AssertionCondition]:
        return conditions_for(self.head, self.assertions)
