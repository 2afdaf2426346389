"""Abstraction of property formulas and the registry of built-in properties.

For a conjunction of property literals, each domain yields an
over-approximation of its trivial success set and, when the pair
``(property, domain)`` is registered exact, an under-approximation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from ..terms import Struct, Term, Var, is_int
from .base import AbstractSubst, Domain
from .shapes import Shapes
from .shfr import ShFr
from .types import BOT, BUILTIN_DEFS, TERM, TypeDef, TypeTable

# properties that never bind their argument when run
TEST_PROPS = {"var", "nonvar", "ground", "int", "num", "atm", "atomic", "term"}
TYPE_PROPS = {"int", "num", "atm", "atomic", "list"}
BUILTIN_PROPS = TEST_PROPS | {"list"}

# trusted success descriptions of built-in predicates, as property conjunctions
# over the argument positions
BUILTIN_POSTS = {
    ("functor", 3): (("ground", 1), ("int", 2)),
    ("succ", 2): (("int", 0), ("int", 1)),
}


class UnknownProperty(Exception):
    pass


@dataclass(frozen=True)
class PropDef:
    name: str
    arity: int
    kind: str  # "regtype" or "prop"
    clauses: tuple  # source clauses (not normalized)
    module: str = ""


@dataclass
class PropApprox:
    over: AbstractSubst
    under: Optional[AbstractSubst]
    exact: bool


class PropContext:
    """Property definitions visible to a formula: a module's plus a query's."""

    def __init__(self, defs: Iterable[PropDef] = ()):
        self.defs: dict[tuple[str, int], PropDef] = {}
        for d in defs:
            self.defs.setdefault((d.name, d.arity), d)
        self._translating: set[str] = set()
        self._exact: dict[str, bool] = {}
        self._fallback: dict = {}

    @classmethod
    def from_modules(cls, modules: Iterable, extra: Iterable[PropDef] = ()) -> "PropContext":
        defs = list(extra)
        for m in modules:
            for key, kind in m.properties.items():
                defs.append(PropDef(key[0], key[1], kind, m.clauses.get(key, ()), m.name))
        return cls(defs)

    def with_defs(self, extra: Iterable[PropDef]) -> "PropContext":
        return PropContext(list(extra) + list(self.defs.values()))

    def knows(self, name: str, arity: int) -> bool:
        return (name, arity) in self.defs or (arity == 1 and name in BUILTIN_PROPS) or \
            (name == "list" and arity == 2)

    # -- regtype translation --------------------------------------------------
    def type_name(self, table: TypeTable, name: str) -> Optional[str]:
        """Type for the unary property ``name`` in ``table``; None when untranslatable."""
        if name == "term":
            return TERM
        if name in BUILTIN_DEFS:
            return name
        d = self.defs.get((name, 1))
        if d is None:
            if name in table.declared:
                return name
            raise UnknownProperty(f"unknown property {name}/1")
        if name in self._translating:
            return name
        if name in table.declared:
            if name not in self._exact:
                out = self._translate(table.copy(), d) if d.kind == "regtype" else None
                self._exact[name] = bool(out and out[1])
            return name
        if self._exact.get(name) is None and d.kind != "regtype":
            self._exact[name] = False
        if d.kind != "regtype":
            return None
        self._translating.add(name)
        try:
            out = self._translate(table, d)
        finally:
            self._translating.discard(name)
        if out is None:
            self._exact[name] = False
            return None
        tdef, exact = out
        table.declare(name, tdef)
        self._exact[name] = exact
        return name

    def is_exact_type(self, name: str) -> bool:
        if name == "term" or name in BUILTIN_DEFS:
            return True
        return self._exact.get(name, False)

    def _lit_type(self, table: TypeTable, lit: Term) -> Optional[tuple[Var, str, bool]]:
        if not isinstance(lit, Struct) or isinstance(lit.functor, int):
            return None
        if lit.arity == 1 and isinstance(lit.args[0], Var):
            if lit.functor in ("var", "ground", "nonvar"):
                return None
            t = self.type_name(table, lit.functor)
            if t is None:
                return None
            return lit.args[0], t, self.is_exact_type(lit.functor)
        if lit.functor == "list" and lit.arity == 2 and isinstance(lit.args[0], Var):
            p = lit.args[1]
            if isinstance(p, Struct) and not p.args and isinstance(p.functor, str):
                t = self.type_name(table, p.functor)
                if t is None:
                    return None
                return lit.args[0], table.list_of(t), self.is_exact_type(p.functor)
        return None

    def _translate(self, table: TypeTable, d: PropDef) -> Optional[tuple[TypeDef, bool]]:
        leaves: set[str] = set()
        cases: dict = {}
        exact = True
        for c in d.clauses:
            head_arg = c.head.args[0]
            env: dict[Var, str] = {}
            for lit in c.body:
                if isinstance(lit, Struct) and lit.functor == "true" and not lit.args:
                    continue
                r = self._lit_type(table, lit)
                if r is None:
                    return None
                v, t, ex = r
                exact = exact and ex
                if v in env:
                    exact = False  # two properties on one variable: keep the last
                env[v] = t
            occurrences = list(_iter_var_occurrences(head_arg))
            if len(occurrences) != len(set(occurrences)):
                exact = False
            if not set(env) <= set(occurrences):
                return None
            if isinstance(head_arg, Var):
                t = env.get(head_arg, TERM)
                if t == TERM:
                    return None
                if t == d.name:
                    continue
                alias = table.get(t)
                leaves |= alias.leaves
                new_cases = alias.case_map
            else:
                lv, new_cases = _pattern_def(table, head_arg, env)
                leaves |= lv
            for k, args in new_cases.items():
                if k in cases:
                    exact = False
                    if cases[k] != args:
                        merged = []
                        for a, b in zip(cases[k], args):
                            if d.name in (a, b) or a in self._translating or b in self._translating:
                                merged.append(TERM)
                            else:
                                merged.append(table.lub(a, b))
                        cases[k] = tuple(merged)
                else:
                    cases[k] = args
        if not leaves and not cases:
            return None
        return TypeDef.make(leaves, cases), exact

    # -- analysis fallback ----------------------------------------------------
    def fallback_over(self, domain: Domain, name: str, arity: int) -> Optional[AbstractSubst]:
        """Success of a Top call to a user property, from analyzing its definition."""
        d = self.defs.get((name, arity))
        if d is None:
            return None
        from ..analysis import analyze_property

        key = (domain.name, name, arity, id(getattr(domain, "table", None)))
        if key not in self._fallback:
            self._fallback[key] = analyze_property(self, domain, d)
        return self._fallback[key]


def _iter_var_occurrences(t: Term):
    if isinstance(t, Var):
        yield t
    elif isinstance(t, Struct):
        for a in t.args:
            yield from _iter_var_occurrences(a)


def _pattern_def(table: TypeTable, t: Struct, env) -> tuple[set, dict]:
    if is_int(t):
        return {"int"}, {}
    if not t.args:
        return set(), {(t.functor, 0): ()}

    def arg_type(a: Term) -> str:
        if isinstance(a, Var):
            return env.get(a, TERM)
        if is_int(a):
            return "int"
        lv, cs = _pattern_def(table, a, env)
        return table.make(lv, cs)

    return set(), {(t.functor, t.arity): tuple(arg_type(a) for a in t.args)}


def ground_only(table: TypeTable, name: str) -> bool:
    """Are all members of type ``name`` ground terms?"""
    if name == TERM:
        return False
    if name == BOT:
        return True
    for n in table.reachable(name):
        for _, args in table.get(n).cases:
            if TERM in args and not any(table.is_empty(a) for a in args):
                return False
    return True


# -- per-literal and conjunction abstraction ----------------------------------------


def _shfr_ground(dom: ShFr, vars, x: Var) -> AbstractSubst:
    top = dom.top(vars)
    return dom.element(vars, [g for g in top.payload[0] if x not in g])


def _shfr_free(dom: ShFr, vars, x: Var) -> AbstractSubst:
    top = dom.top(vars)
    return dom.element(vars, top.payload[0], [x])


def literal_approx(lit: Struct, domain: Domain, vars: Sequence[Var], ctx: PropContext) -> PropApprox:
    vars = tuple(vars)
    top = domain.top(vars)
    if not isinstance(lit, Struct) or isinstance(lit.functor, int):
        raise UnknownProperty(f"not a property literal: {lit}")
    name, n = lit.functor, lit.arity
    if not ctx.knows(name, n):
        raise UnknownProperty(f"unknown property {name}/{n}")
    x = lit.args[0] if n >= 1 else None
    if not isinstance(x, Var) or x not in vars:
        # non-variable or foreign argument: no information
        return PropApprox(top, None, False)
    if isinstance(domain, ShFr):
        return _shfr_literal(lit, domain, vars, ctx, top)
    if isinstance(domain, Shapes):
        return _shapes_literal(lit, domain, vars, ctx, top)
    raise UnknownProperty(f"domain {domain.name} has no property abstraction")


def _shfr_literal(lit, dom: ShFr, vars, ctx, top) -> PropApprox:
    name, n, x = lit.functor, lit.arity, lit.args[0]
    if n == 1 and name == "var":
        e = _shfr_free(dom, vars, x)
        return PropApprox(e, e, True)
    if n == 1 and name == "ground":
        e = _shfr_ground(dom, vars, x)
        return PropApprox(e, e, True)
    if n == 1 and name == "term":
        return PropApprox(top, top, True)
    if n == 1 and name in ("int", "num", "atm", "atomic"):
        return PropApprox(_shfr_ground(dom, vars, x), None, False)
    if n == 1 and name == "nonvar":
        return PropApprox(top, None, False)
    scratch = TypeTable()
    try:
        r = ctx._lit_type(scratch, lit)
    except UnknownProperty:
        r = None
    if r is not None:
        _, t, _ = r
        over = _shfr_ground(dom, vars, x) if ground_only(scratch, t) else top
        return PropApprox(over, None, False)
    fb = ctx.fallback_over(dom, name, n)
    if fb is not None and n == 1:
        over = dom.rename(fb, {fb.vars[0]: x})
        over = _pad(dom, over, vars)
        return PropApprox(over, None, False)
    return PropApprox(top, None, False)


def _shapes_literal(lit, dom: Shapes, vars, ctx, top) -> PropApprox:
    name, n, x = lit.functor, lit.arity, lit.args[0]
    if n == 1 and name in ("var", "ground", "nonvar"):
        return PropApprox(top, None, False)
    if n == 1 and name == "term":
        return PropApprox(top, top, True)
    r = ctx._lit_type(dom.table, lit)
    if r is not None:
        v, t, exact = r
        e = dom.element(vars, {v: t})
        return PropApprox(e, e if exact else None, exact)
    fb = ctx.fallback_over(dom, name, n)
    if fb is not None and n == 1:
        over = _pad(dom, dom.rename(fb, {fb.vars[0]: x}), vars)
        return PropApprox(over, None, False)
    return PropApprox(top, None, False)


def _pad(dom: Domain, a: AbstractSubst, vars) -> AbstractSubst:
    """Re-express ``a`` over ``vars`` (missing variables unconstrained)."""
    vars = tuple(vars)
    if a.is_bottom:
        return dom.bottom(vars)
    inner = [v for v in vars if v in a.vars]
    base = dom.project(a, inner)
    if isinstance(dom, ShFr):
        # unconstrained extra variables may share with anything
        top = dom.top(vars)
        sh = [g for g in top.payload[0] if (g & set(inner)) == frozenset() or (g & set(inner)) in base.payload[0]]
        return dom.element(vars, sh, base.payload[1])
    return dom.element(vars, dict(zip(base.vars, base.payload)))


def abstract_prop(conj: Sequence[Struct], domain: Domain, vars: Sequence[Var], ctx: PropContext) -> PropApprox:
    """Over/under approximation of a conjunction of property literals."""
    vars = tuple(vars)
    over = domain.top(vars)
    under: Optional[AbstractSubst] = domain.top(vars)
    exact = True
    for lit in conj:
        r = literal_approx(lit, domain, vars, ctx)
        over = domain.glb(over, r.over)
        exact = exact and r.exact
        under = domain.glb(under, r.under) if (under is not None and r.under is not None) else None
    return PropApprox(over, under if exact else None, exact)


def ts_over(dnf, domain: Domain, vars, ctx: PropContext) -> AbstractSubst:
    out = domain.bottom(vars)
    for conj in dnf:
        out = domain.lub(out, abstract_prop(conj, domain, vars, ctx).over)
    return out


def ts_under(dnf, domain: Domain, vars, ctx: PropContext) -> Optional[AbstractSubst]:
    if len(dnf) != 1:
        return None
    return abstract_prop(dnf[0], domain, vars, ctx).under


def builtin_post(key: tuple[str, int], domain: Domain, args: Sequence[Var], ctx: PropContext) -> Optional[AbstractSubst]:
    """Trusted success of a built-in predicate over its argument variables."""
    spec = BUILTIN_POSTS.get(key)
    if spec is None:
        return None
    lits = [Struct(p, (args[i],)) for p, i in spec]
    return abstract_prop(lits, domain, args, ctx).over
