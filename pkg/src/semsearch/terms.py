"""Term representation and canonical printing for the analyzed language."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Union


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Struct:
    """A compound term. Atoms have no args; integers use an ``int`` functor."""

    functor: Union[str, int]
    args: tuple["Term", ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def key(self) -> tuple[Union[str, int], int]:
        return (self.functor, len(self.args))

    def __str__(self) -> str:
        return format_term(self)


@dataclass(frozen=True, slots=True)
class Str:
    """A double-quoted string; only used for assertion doc text."""

    text: str

    def __str__(self) -> str:
        return '"' + self.text.replace("\\", "\\\\").replace('"', '\\"') + '"'


Term = Union[Var, Struct, Str]

NIL = Struct("[]")
TRUE = Struct("true")


def atom(name: str) -> Struct:
    return Struct(name)


def cons(head: Term, tail: Term) -> Struct:
    return Struct(".", (head, tail))


def make_list(items, tail: Term = NIL) -> Term:
    out = tail
    for item in reversed(list(items)):
        out = cons(item, out)
    return out


def is_atom(t: Term) -> bool:
    return isinstance(t, Struct) and not t.args and isinstance(t.functor, str)


def is_int(t: Term) -> bool:
    return isinstance(t, Struct) and not t.args and isinstance(t.functor, int)


def is_atomic(t: Term) -> bool:
    return isinstance(t, Struct) and not t.args


def iter_vars(t: Term) -> Iterator[Var]:
    stack = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, Var):
            yield x
        elif isinstance(x, Struct):
            stack.extend(reversed(x.args))


def term_vars(t: Term) -> list[Var]:
    """Distinct variables of ``t`` in first-occurrence order."""
    seen: dict[Var, None] = {}
    for v in iter_vars(t):
        seen.setdefault(v, None)
    return list(seen)


def is_ground(t: Term) -> bool:
    return next(iter_vars(t), None) is None


def substitute(t: Term, mapping: Mapping[Var, Term]) -> Term:
    if isinstance(t, Var):
        return mapping.get(t, t)
    if isinstance(t, Struct) and t.args:
        return Struct(t.functor, tuple(substitute(a, mapping) for a in t.args))
    return t


def term_depth(t: Term) -> int:
    if isinstance(t, Struct) and t.args:
        return 1 + max(term_depth(a) for a in t.args)
    return 0


def conj_to_list(t: Term) -> list[Term]:
    out = []
    while isinstance(t, Struct) and t.functor == "," and t.arity == 2:
        out.extend(conj_to_list(t.args[0]))
        t = t.args[1]
    if not (isinstance(t, Struct) and t.functor == "true" and not t.args):
        out.append(t)
    return out


def list_to_conj(items) -> Term:
    items = list(items)
    if not items:
        return TRUE
    out = items[-1]
    for item in reversed(items[:-1]):
        out = Struct(",", (item, out))
    return out


# -- printing ---------------------------------------------------------------

# name -> (priority, type)
INFIX_OPS: dict[str, tuple[int, str]] = {
    ":-": (1200, "xfx"),
    "#": (1130, "xfx"),
    "=>": (1120, "xfx"),
    ";": (1100, "xfy"),
    "->": (1050, "xfy"),
    ",": (1000, "xfy"),
    "=": (700, "xfx"),
    "\\=": (700, "xfx"),
    "==": (700, "xfx"),
    "is": (700, "xfx"),
    "+": (500, "yfx"),
    "-": (500, "yfx"),
    "*": (400, "yfx"),
    "/": (400, "yfx"),
    "//": (400, "yfx"),
    ":": (200, "xfy"),
    "^": (200, "xfy"),
}

PREFIX_OPS: dict[str, tuple[int, str]] = {
    ":-": (1200, "fx"),
    "?-": (1200, "fx"),
    "pred": (1150, "fx"),
    "regtype": (1150, "fx"),
    "prop": (1150, "fx"),
    "true": (1150, "fy"),
    "trust": (1150, "fy"),
    "check": (1150, "fy"),
    "-": (200, "fy"),
}

_PLAIN_ATOM = re.compile(r"^[a-z][A-Za-z0-9_]*$")
_SYMBOL_ATOM = re.compile(r"^[+\-*/\\^<>=~:.?@#&$]+$")
_ANON = re.compile(r"^_\d+$")


def format_atom(name: str) -> str:
    if _PLAIN_ATOM.match(name) or name in ("[]", "{}", "!", ";", ","):
        return name if name != "," else "','"
    if _SYMBOL_ATOM.match(name):
        return name
    return "'" + name.replace("\\", "\\\\").replace("'", "\\'") + "'"


def format_term(t: Term, anon: frozenset[str] = frozenset(), prec: int = 1200) -> str:
    """Render ``t`` in source syntax. Variables listed in ``anon`` print as ``_``."""
    if isinstance(t, Var):
        return "_" if t.name in anon else t.name
    if isinstance(t, Str):
        return str(t)
    f, args = t.functor, t.args
    if isinstance(f, int):
        return f"({f})" if f < 0 and prec < 200 else str(f)
    if not args:
        s = format_atom(f)
        if prec < 1200 and (f in INFIX_OPS or f in PREFIX_OPS) and f not in ("[]", "true"):
            return f"({s})"
        return s
    if f == "." and len(args) == 2:
        return _format_list(t, anon)
    if f == "{}" and len(args) == 1:
        return "{" + format_term(args[0], anon) + "}"
    if f == "$apply":
        head = format_term(args[0], anon)
        return head + "(" + ",".join(format_term(a, anon, 999) for a in args[1:]) + ")"
    if len(args) == 2 and f in INFIX_OPS:
        p, typ = INFIX_OPS[f]
        lp = p if typ == "yfx" else p - 1
        rp = p if typ == "xfy" else p - 1
        left = format_term(args[0], anon, lp)
        right = format_term(args[1], anon, rp)
        if f == ",":
            s = f"{left}, {right}"
        elif f in (":", "^", "/", "*", "+"):
            s = f"{left}{f}{right}"
        elif f == "-":
            s = f"{left}-{right}" if not right.startswith("-") else f"{left}- {right}"
        else:
            s = f"{left} {f} {right}"
        return f"({s})" if p > prec else s
    if len(args) == 1 and f in PREFIX_OPS and f != "-":
        p, typ = PREFIX_OPS[f]
        ap = p if typ == "fy" else p - 1
        s = f"{f} {format_term(args[0], anon, ap)}"
        return f"({s})" if p > prec else s
    return format_atom(f) + "(" + ",".join(format_term(a, anon, 999) for a in args) + ")"


def _format_list(t: Struct, anon: frozenset[str]) -> str:
    items = []
    while isinstance(t, Struct) and t.functor == "." and len(t.args) == 2:
        items.append(format_term(t.args[0], anon, 999))
        t = t.args[1]
    if t == NIL:
        return "[" + ",".join(items) + "]"
    return "[" + ",".join(items) + "|" + format_term(t, anon, 999) + "]"


def anonymous_singletons(terms) -> frozenset[str]:
    """Names of generated anonymous variables that occur exactly once."""
    counts: dict[str, int] = {}
    for t in terms:
        for v in iter_vars(t):
            counts[v.name] = counts.get(v.name, 0) + 1
    return frozenset(n for n, c in counts.items() if c == 1 and _ANON.match(n))
