"""Clauses, modules, parsing of module sources, and normalization to base form."""

from __future__ import annotations

import hashlib
import itertools
import string
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .assertions import Assertion, AssertionSyntaxError, assertion_from_term
from .reader import ParseError, Reader
from .terms import (
    Struct,
    Term,
    Var,
    anonymous_singletons,
    conj_to_list,
    format_term,
    iter_vars,
    list_to_conj,
    substitute,
    term_vars,
)

HASH_ALGORITHM = "sha256"

# Built-in predicates the analyzed language may call.
BUILTIN_PREDICATES = {
    ("=", 2), ("true", 0), ("fail", 0), ("functor", 3), ("succ", 2),
    ("var", 1), ("nonvar", 1), ("ground", 1), ("int", 1), ("num", 1), ("atm", 1),
    ("atomic", 1), ("term", 1), ("list", 1), ("list", 2),
}


class ModuleError(Exception):
    """Semantic error in a module (duplicate declaration, bad export, ...)."""


@dataclass(frozen=True, order=True)
class PredId:
    module: str
    name: str
    arity: int

    def __str__(self) -> str:
        return f"{self.module}:{self.name}/{self.arity}"

    @property
    def key(self) -> tuple[str, int]:
        return (self.name, self.arity)


@dataclass(frozen=True)
class Clause:
    head: Struct
    body: tuple[Term, ...] = ()
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    @property
    def key(self) -> tuple[str, int]:
        return (self.head.functor, self.head.arity)

    def terms(self) -> list[Term]:
        return [self.head, *self.body]

    def __str__(self) -> str:
        return format_clause(self)


def format_clause(c: Clause) -> str:
    anon = anonymous_singletons(c.terms())
    head = format_term(c.head, anon, 1199)
    if not c.body:
        return head + "."
    body = ", ".join(format_term(b, anon, 999) for b in c.body)
    return f"{head} :- {body}."


def clause_from_term(t: Term, line: int = 0, col: int = 0) -> Clause:
    if isinstance(t, Struct) and t.functor == ":-" and t.arity == 2:
        head, body = t.args
        literals = tuple(conj_to_list(body))
    else:
        head, literals = t, ()
    if not isinstance(head, Struct) or isinstance(head.functor, int) or head.functor in (",", ";", "$apply"):
        raise ParseError("clause head must be an atom or compound term", line, col, format_term(head))
    for lit in literals:
        if isinstance(lit, Var) or (isinstance(lit, Struct) and isinstance(lit.functor, int)):
            raise ParseError("body literal must be callable", line, col, format_term(lit))
    return Clause(head, literals, line, col)


@dataclass(frozen=True)
class Module:
    name: str
    exports: tuple[PredId, ...]
    imports: tuple[str, ...]
    clauses: dict  # (name, arity) -> tuple[Clause, ...] in source order
    assertions: tuple[Assertion, ...] = ()
    properties: dict = field(default_factory=dict)  # (name, arity) -> "prop" | "regtype"
    source_hash: str = ""
    flags: tuple[str, ...] = ()
    path: Optional[str] = field(default=None, compare=False)

    def defined(self) -> list[tuple[str, int]]:
        return list(self.clauses)

    def pred_id(self, key: tuple[str, int]) -> PredId:
        return PredId(self.name, key[0], key[1])

    def assertions_for(self, key: tuple[str, int], kinds: Iterable[str] = ("pred",)) -> list[Assertion]:
        kinds = tuple(kinds)
        return [a for a in self.assertions
                if a.kind in kinds and (a.name, a.arity) == key]

    def is_property(self, key: tuple[str, int]) -> bool:
        return key in self.properties

    def all_clauses(self) -> list[Clause]:
        return [c for cs in self.clauses.values() for c in cs]


def source_digest(text: str) -> str:
    return hashlib.new(HASH_ALGORITHM, text.encode("utf-8")).hexdigest()


def _pred_spec(t: Term, line: int, col: int) -> tuple[str, int]:
    if isinstance(t, Struct) and t.functor == "/" and t.arity == 2:
        name, ar = t.args
        if isinstance(name, Struct) and not name.args and isinstance(ar, Struct) and isinstance(ar.functor, int):
            return (str(name.functor), ar.functor)
    if isinstance(t, Struct) and isinstance(t.functor, str):
        return (t.functor, t.arity)
    raise ParseError("expected a predicate indicator Name/Arity", line, col, format_term(t))


def _list_items(t: Term) -> Optional[list[Term]]:
    items = []
    while isinstance(t, Struct) and t.functor == "." and t.arity == 2:
        items.append(t.args[0])
        t = t.args[1]
    if t == Struct("[]"):
        return items
    return None


def parse_module(source_text: str, default_name: str = "user", path: Optional[str] = None) -> Module:
    """Parse one module source. ``default_name`` is used when the declared name is ``_``."""
    reader = Reader(source_text)
    name: Optional[str] = None
    export_all = False
    export_specs: list[tuple[str, int]] = []
    imports: list[str] = []
    flags: list[str] = []
    clauses: dict[tuple[str, int], list[Clause]] = {}
    assertions: list[Assertion] = []
    properties: dict[tuple[str, int], str] = {}
    seen_module = False

    for rc in reader.read_all():
        t, line, col = rc.term, rc.line, rc.col
        if isinstance(t, Struct) and t.functor == ":-" and t.arity == 1:
            d = t.args[0]
            if isinstance(d, Struct) and d.functor == "module" and d.arity in (2, 3):
                if seen_module:
                    raise ModuleError(f"duplicate module declaration at line {line}")
                seen_module = True
                mname = d.args[0]
                name = default_name if isinstance(mname, Var) else str(mname.functor)
                ex = d.args[1]
                if isinstance(ex, Var):
                    export_all = True
                else:
                    items = _list_items(ex)
                    if items is None:
                        raise ParseError("export list must be a list or '_'", line, col)
                    export_specs.extend(_pred_spec(x, line, col) for x in items)
                if d.arity == 3:
                    fl = _list_items(d.args[2]) or []
                    flags.extend(format_term(f) for f in fl)
                continue
            if isinstance(d, Struct) and d.functor in ("use_module", "ensure_loaded") and d.arity >= 1:
                target = d.args[0]
                if isinstance(target, Struct) and target.functor == "library" and target.arity == 1:
                    target = target.args[0]
                imports.append(str(target.functor) if isinstance(target, Struct) else format_term(target))
                continue
            if isinstance(d, Struct) and d.functor in ("regtype", "prop") and d.arity == 1:
                spec = d.args[0]
                if isinstance(spec, Struct) and spec.functor == "#" and spec.arity == 2:
                    spec = spec.args[0]  # trailing doc string
                properties[_pred_spec(spec, line, col)] = d.functor
                continue
            try:
                a = assertion_from_term(d, line, col)
            except AssertionSyntaxError as e:
                raise ParseError(str(e), line, col) from None
            if a is not None:
                if a.is_query:
                    raise ParseError("query assertion inside a module", line, col)
                assertions.append(a)
                continue
            raise ParseError("unsupported directive", line, col, format_term(d))
        c = clause_from_term(t, line, col)
        clauses.setdefault(c.key, []).append(c)

    name = name or default_name
    trusted = {(a.name, a.arity) for a in assertions if a.kind == "trust"}
    if export_all:
        keys = list(clauses)
        keys += [k for k in sorted(trusted) if k not in clauses]
    else:
        keys = []
        for k in export_specs:
            if k not in clauses and k not in trusted:
                raise ModuleError(f"module {name} exports undefined predicate {k[0]}/{k[1]}")
            if k not in keys:
                keys.append(k)
    return Module(
        name=name,
        exports=tuple(PredId(name, k[0], k[1]) for k in keys),
        imports=tuple(imports),
        clauses={k: tuple(v) for k, v in clauses.items()},
        assertions=tuple(assertions),
        properties=properties,
        source_hash=source_digest(source_text),
        flags=tuple(flags),
        path=path,
    )


def load_module(path) -> Module:
    from pathlib import Path

    p = Path(path)
    text = p.read_text(encoding="utf-8")
    return parse_module(text, default_name=p.stem, path=str(p))


# -- normalization -------------------------------------------------------------


def base_vars(arity: int) -> tuple[Var, ...]:
    """The shared head variable sequence of the base form: A, B, C, ..."""
    letters = string.ascii_uppercase
    names = []
    for i in range(arity):
        names.append(letters[i] if i < 26 else f"A{i}")
    return tuple(Var(n) for n in names)


def normalize(clause: Clause) -> Clause:
    """Rewrite ``clause`` into base form ``p(A,B,...) :- A = t1, ..., Body``."""
    head = clause.head
    bases = base_vars(head.arity)
    clause_vars = set()
    for t in clause.terms():
        clause_vars.update(iter_vars(t))

    rename: dict[Var, Term] = {}
    firsts: dict[Var, Var] = {}  # clause var taken as base var -> base var
    for arg, base in zip(head.args, bases):
        if isinstance(arg, Var) and arg not in firsts:
            firsts[arg] = base
    base_set = set(bases)
    # variables that collide with base names but are not renamed to them
    counter = itertools.count(1)
    for v in sorted(clause_vars, key=lambda x: x.name):
        if v in firsts:
            rename[v] = firsts[v]
        elif v in base_set:
            while True:
                fresh = Var(f"{v.name}_{next(counter)}")
                if fresh not in clause_vars:
                    break
            rename[v] = fresh
    eqs: list[Term] = []
    taken: set[Var] = set()
    for arg, base in zip(head.args, bases):
        if isinstance(arg, Var) and firsts.get(arg) == base and base not in taken:
            taken.add(base)
            continue
        eqs.append(Struct("=", (base, substitute(arg, rename))))
    body = tuple(eqs) + tuple(substitute(b, rename) for b in clause.body)
    return Clause(Struct(head.functor, bases), body, clause.line, clause.col)


def rename_apart(clause: Clause, fresh_seed: Union[int, "itertools.count"] = 0) -> Clause:
    """A variant of ``clause`` whose variables are ``_V<n>`` for fresh ``n``.

    Pass the same ``itertools.count`` object across calls to keep names globally fresh.
    """
    counter = itertools.count(fresh_seed) if isinstance(fresh_seed, int) else fresh_seed
    mapping: dict[Var, Term] = {}
    for t in clause.terms():
        for v in term_vars(t):
            if v not in mapping:
                mapping[v] = Var(f"_V{next(counter)}")
    return Clause(substitute(clause.head, mapping),
                  tuple(substitute(b, mapping) for b in clause.body),
                  clause.line, clause.col)


def body_goals(body: Iterable[Term]) -> Term:
    return list_to_conj(body)
