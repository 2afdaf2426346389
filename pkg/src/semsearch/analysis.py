"""Goal-dependent, multivariant analysis of one module over one abstract domain.

The fixpoint is computed by round-robin iteration over a table of variants
keyed by ``(predicate, call pattern)``. Call patterns are compared by
leq-equality. Each predicate holds at most ``max_variants`` variants; later
patterns are answered by a covering variant or widened into the last one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .assertions import TRUE_DNF
from .domains import make_domain
from .domains.base import AbstractSubst, Domain
from .domains.props import (
    BUILTIN_POSTS,
    TEST_PROPS,
    PropContext,
    PropDef,
    abstract_prop,
    builtin_post,
    literal_approx,
    ts_over,
)
from .domains.shapes import Shapes, export_types
from .domains.types import BUILTIN_DEFS, TypeTable
from .lang import Module, PredId, base_vars, normalize
from .terms import Struct, Term, Var, conj_to_list, term_vars

MAX_ITERATIONS = 1000


class AnalysisError(Exception):
    pass


@dataclass(frozen=True)
class AnalysisConfig:
    max_variants: int = 8
    max_iterations: int = MAX_ITERATIONS
    widening_depth: int = 3
    replay_passes: int = 4


@dataclass(frozen=True)
class EntryPattern:
    pred: PredId
    call: AbstractSubst


@dataclass(frozen=True)
class AnalysisTriple:
    pred: PredId
    head: Struct
    call: AbstractSubst
    success: AbstractSubst


@dataclass
class AnalysisResult:
    module: str
    source_hash: str
    domain_id: str
    entries: list
    triples: list
    domain: Domain = field(repr=False, compare=False, default=None)
    iterations: int = field(default=0, compare=False)
    types: tuple = ()  # shapes: ((name, declared, TypeDef), ...) for non-builtin names

    def triples_for(self, name: str, arity: int) -> list[AnalysisTriple]:
        return [t for t in self.triples if t.pred.name == name and t.pred.arity == arity]

    @property
    def table(self) -> Optional[TypeTable]:
        return getattr(self.domain, "table", None)


@dataclass
class ImportsDB:
    """Trusted descriptions of imported predicates."""

    assertions: dict = field(default_factory=dict)  # (name, arity) -> [Assertion]
    props: list = field(default_factory=list)  # PropDef
    modules: set = field(default_factory=set)

    @classmethod
    def from_modules(cls, modules: Iterable[Module]) -> "ImportsDB":
        db = cls()
        for m in modules:
            db.modules.add(m.name)
            exported = {p.key for p in m.exports}
            for a in m.assertions:
                if (a.name, a.arity) in exported:
                    db.assertions.setdefault((a.name, a.arity), []).append(a)
            for key, kind in m.properties.items():
                db.props.append(PropDef(key[0], key[1], kind, m.clauses.get(key, ()), m.name))
        return db


# -- body preprocessing --------------------------------------------------------


@dataclass(frozen=True)
class Eq:
    x: Var
    t: Term


@dataclass(frozen=True)
class Call:
    key: tuple
    args: tuple


@dataclass(frozen=True)
class Disj:
    branches: tuple


class Fail:
    pass


FAIL = Fail()


def _decompose(a: Term, b: Term, out: list) -> None:
    if isinstance(a, Var):
        out.append(Eq(a, b))
    elif isinstance(b, Var):
        out.append(Eq(b, a))
    elif a.functor != b.functor or len(a.args) != len(b.args):
        out.append(FAIL)
    else:
        for x, y in zip(a.args, b.args):
            _decompose(x, y, out)


def preprocess_body(body: Sequence[Term], fresh) -> list:
    """Turn literals into analysis items; call arguments become distinct variables."""
    items: list = []
    for lit in body:
        if isinstance(lit, Var):
            raise AnalysisError("meta-call of a variable is not supported")
        f, n = lit.functor, len(lit.args)
        if (f, n) == ("true", 0):
            continue
        if (f, n) == ("fail", 0):
            items.append(FAIL)
        elif (f, n) == ("=", 2):
            _decompose(lit.args[0], lit.args[1], items)
        elif (f, n) in ((",", 2), ("->", 2)):
            items.extend(preprocess_body(conj_to_list(lit.args[0]) + conj_to_list(lit.args[1]), fresh))
        elif (f, n) == (";", 2):
            branches = []
            t = lit
            while isinstance(t, Struct) and t.functor == ";" and len(t.args) == 2:
                branches.append(tuple(preprocess_body(conj_to_list(t.args[0]), fresh)))
                t = t.args[1]
            branches.append(tuple(preprocess_body(conj_to_list(t), fresh)))
            items.append(Disj(tuple(branches)))
        else:
            args, seen = [], set()
            for a in lit.args:
                if isinstance(a, Var) and a not in seen:
                    seen.add(a)
                    args.append(a)
                else:
                    v = Var(f"_F{next(fresh)}")
                    items.append(Eq(v, a))
                    args.append(v)
            items.append(Call((f, n), tuple(args)))
    return items


def _item_vars(items, out: dict) -> None:
    for it in items:
        if isinstance(it, Eq):
            out.setdefault(it.x, None)
            for v in term_vars(it.t):
                out.setdefault(v, None)
        elif isinstance(it, Call):
            for v in it.args:
                out.setdefault(v, None)
        elif isinstance(it, Disj):
            for b in it.branches:
                _item_vars(b, out)


@dataclass
class _Prepared:
    head_vars: tuple
    local_vars: tuple
    items: list


@dataclass
class _Variant:
    call: AbstractSubst
    success: AbstractSubst


# -- the analyzer --------------------------------------------------------------


class Analyzer:
    def __init__(self, module: Module, domain: Domain, ctx: PropContext,
                 imports: Optional[ImportsDB] = None, config: AnalysisConfig = AnalysisConfig()):
        self.module = module
        self.domain = domain
        self.ctx = ctx
        self.imports = imports or ImportsDB()
        self.config = config
        self.table: dict[tuple, list[_Variant]] = {}
        self.order: list[tuple] = []
        self.changed = False
        self.iterations = 0
        fresh = itertools.count()
        self.prepared: dict[tuple, list[_Prepared]] = {}
        for key, clauses in module.clauses.items():
            prepared = []
            for c in clauses:
                nc = normalize(c)
                items = preprocess_body(nc.body, fresh)
                vs: dict = {v: None for v in nc.head.args}
                _item_vars(items, vs)
                head = tuple(nc.head.args)
                prepared.append(_Prepared(head, tuple(v for v in vs if v not in head), items))
            self.prepared[key] = prepared
        self._import_cache: dict = {}

    # -- table ---------------------------------------------------------------
    def lookup(self, key: tuple, call: AbstractSubst) -> AbstractSubst:
        d = self.domain
        variants = self.table.get(key)
        if variants is None:
            variants = self.table[key] = []
            self.order.append(key)
        for v in variants:
            if d.equal(v.call, call):
                return v.success
        if len(variants) < self.config.max_variants:
            variants.append(_Variant(call, d.bottom(call.vars)))
            self.changed = True
            return variants[-1].success
        for v in variants:
            if d.leq(call, v.call):
                return v.success
        last = variants[-1]
        last.call = d.widen(last.call, d.lub(last.call, call))
        self.changed = True
        return last.success

    def run(self, entries: Sequence[EntryPattern]) -> None:
        for e in entries:
            if e.pred.key in self.prepared:
                self.lookup(e.pred.key, e.call)
        while True:
            self.iterations += 1
            if self.iterations > self.config.max_iterations:
                raise AnalysisError(f"no fixpoint after {self.config.max_iterations} iterations")
            self.changed = False
            for key in list(self.order):
                for v in list(self.table[key]):
                    new = self.solve_variant(key, v.call)
                    old = v.success
                    merged = self.domain.widen(old, self.domain.lub(old, new))
                    if not self.domain.equal(merged, old):
                        v.success = merged
                        self.changed = True
            if not self.changed:
                return

    # -- clauses -------------------------------------------------------------
    def solve_variant(self, key: tuple, call: AbstractSubst) -> AbstractSubst:
        d = self.domain
        out = d.bottom(call.vars)
        for p in self.prepared[key]:
            state = d.extend_fresh(d.rename(call, dict(zip(call.vars, p.head_vars))), p.local_vars)
            state = self.run_items(p.items, state, [])
            if not state.is_bottom:
                succ = d.project(state, p.head_vars)
                out = d.lub(out, d.rename(succ, dict(zip(p.head_vars, call.vars))))
        return out

    def _replay(self, state: AbstractSubst, eqs: list) -> AbstractSubst:
        if not isinstance(self.domain, Shapes) or not eqs:
            return state
        d = self.domain
        for _ in range(self.config.replay_passes):
            new = state
            for e in eqs:
                new = d.amgu(new, e.x, e.t)
                if new.is_bottom:
                    return new
            if d.equal(new, state):
                return new
            state = new
        return state

    def run_items(self, items, state: AbstractSubst, eqs: list) -> AbstractSubst:
        d = self.domain
        eqs = list(eqs)
        for it in items:
            if state.is_bottom:
                return state
            if it is FAIL:
                return d.bottom(state.vars)
            if isinstance(it, Eq):
                state = d.amgu(state, it.x, it.t)
                eqs.append(it)
            elif isinstance(it, Disj):
                acc = d.bottom(state.vars)
                for b in it.branches:
                    acc = d.lub(acc, self.run_items(b, state, eqs))
                state = acc
            else:
                state = self._replay(state, eqs)
                state = self.call(it, state)
        return self._replay(state, eqs)

    def call(self, it: Call, state: AbstractSubst) -> AbstractSubst:
        d = self.domain
        key, args = it.key, it.args
        bases = base_vars(len(args))
        proj = d.rename(d.project(state, args), dict(zip(args, bases)))
        if proj.is_bottom:
            return d.bottom(state.vars)
        if key in self.prepared:
            succ = self.lookup(key, proj)
        else:
            succ = self.builtin_or_import(key, proj, bases)
        if succ.is_bottom:
            return d.bottom(state.vars)
        return d.extend_call(state, args, d.rename(succ, dict(zip(bases, args))))

    def builtin_or_import(self, key: tuple, proj: AbstractSubst, bases) -> AbstractSubst:
        d = self.domain
        name, n = key
        if n == 1 and name in TEST_PROPS:
            return d.glb(proj, literal_approx(Struct(name, (bases[0],)), d, bases, self.ctx).over)
        if name == "list" and n in (1, 2):
            lit = Struct("list", tuple(bases))
            over = literal_approx(lit, d, bases, self.ctx).over
            return d.glb(d.weaken(proj), over)
        if key in BUILTIN_POSTS:
            return d.glb(d.weaken(proj), builtin_post(key, d, bases, self.ctx))
        if key in self.imports.assertions:
            return d.glb(d.weaken(proj), self._import_post(key, proj, bases))
        if self.ctx.knows(name, n) and (name, n) in self.ctx.defs:
            over = self.ctx.fallback_over(d, name, n)
            if over is not None:
                return d.glb(d.weaken(proj), d.rename(over, dict(zip(over.vars, bases))))
        raise AnalysisError(f"{self.module.name}: call to unknown predicate {name}/{n}")

    def _import_post(self, key, proj, bases) -> AbstractSubst:
        d = self.domain
        for a in self.imports.assertions[key]:
            r = a.renamed(bases)
            if d.leq(proj, ts_over(r.pre, d, bases, self.ctx)):
                if r.post == TRUE_DNF:
                    return d.top(bases)
                return ts_over(r.post, d, bases, self.ctx)
        return d.top(bases)

    def triples(self) -> list[AnalysisTriple]:
        out = []
        for key in self.order:
            pid = self.module.pred_id(key)
            head = Struct(key[0], base_vars(key[1]))
            for v in self.table[key]:
                out.append(AnalysisTriple(pid, head, v.call, v.success))
        pos = {k: i for i, k in enumerate(self.module.clauses)}
        out.sort(key=lambda t: pos.get(t.pred.key, len(pos)))
        return out


# -- public operations -----------------------------------------------------------


def make_context(module: Module, imports: Optional[ImportsDB] = None,
                 extra: Iterable[PropDef] = ()) -> PropContext:
    imported = list(imports.props) if imports else []
    return PropContext.from_modules([module], list(extra) + imported)


def new_domain(domain_id: str, config: AnalysisConfig = AnalysisConfig()) -> Domain:
    if domain_id == "shapes":
        return Shapes(TypeTable(depth=config.widening_depth))
    return make_domain(domain_id)


def derive_entries(module: Module, domain: Domain, ctx: PropContext) -> list[EntryPattern]:
    """One entry per precondition disjunct of a predicate's ``pred`` assertions; Top otherwise."""
    entries: list[EntryPattern] = []
    for pid in module.exports:
        if pid.key not in module.clauses:
            continue
        bases = base_vars(pid.arity)
        asserts = module.assertions_for(pid.key, ("pred",))
        calls: list[AbstractSubst] = []
        if not asserts:
            calls.append(domain.top(bases))
        for a in asserts:
            r = a.renamed(bases)
            for conj in r.pre:
                calls.append(abstract_prop(conj, domain, bases, ctx).over)
        seen: list[AbstractSubst] = []
        for c in calls:
            if c.is_bottom or any(domain.equal(c, s) for s in seen):
                continue
            seen.append(c)
            entries.append(EntryPattern(pid, c))
    return entries


def analyze(module: Module, domain_id: str, entries: Optional[Sequence[EntryPattern]] = None,
            imports_db: Optional[ImportsDB] = None, *, domain: Optional[Domain] = None,
            ctx: Optional[PropContext] = None, config: AnalysisConfig = AnalysisConfig(),
            minimize: bool = True) -> AnalysisResult:
    """Analyze ``module``; entries default to ``derive_entries``."""
    domain = domain or new_domain(domain_id, config)
    ctx = ctx or make_context(module, imports_db)
    for key in module.properties:
        if domain.name == "shapes" and key[1] == 1:
            ctx.type_name(domain.table, key[0])
    if entries is None:
        entries = derive_entries(module, domain, ctx)
    an = Analyzer(module, domain, ctx, imports_db, config)
    an.run(entries)
    result = AnalysisResult(module.name, module.source_hash, domain.name, list(entries),
                            an.triples(), domain, an.iterations)
    if minimize and domain.name == "shapes":
        result = minimize_types(result)
    return result


def reanalyze_from(module: Module, domain_id: str, pred: PredId, call: AbstractSubst,
                   imports_db: Optional[ImportsDB] = None, *, domain: Optional[Domain] = None,
                   ctx: Optional[PropContext] = None, config: AnalysisConfig = AnalysisConfig(),
                   minimize: bool = True) -> AnalysisResult:
    """Analysis with the derived entries plus ``(pred, call)``.

    ``call`` must live in ``domain`` (for shapes, in its type table).
    """
    if call.is_bottom:
        raise AnalysisError("refinement call pattern is bottom")
    domain = domain or new_domain(domain_id, config)
    ctx = ctx or make_context(module, imports_db)
    entries = derive_entries(module, domain, ctx)
    if not any(e.pred == pred and domain.equal(e.call, call) for e in entries):
        entries.append(EntryPattern(pred, call))
    return analyze(module, domain_id, entries, imports_db, domain=domain, ctx=ctx,
                   config=config, minimize=minimize)


def analyze_property(ctx: PropContext, domain: Domain, d: PropDef) -> AbstractSubst:
    """Success of a Top call to the property ``d``, analyzing all visible definitions."""
    clauses = {}
    for pd in ctx.defs.values():
        if pd.clauses:
            clauses[(pd.name, pd.arity)] = tuple(pd.clauses)
    bases = base_vars(d.arity)
    if (d.name, d.arity) not in clauses:
        return domain.top(bases)
    m = Module(name=f"$props:{d.module}", exports=(), imports=(), clauses=clauses)
    an = Analyzer(m, domain, ctx, None)
    an.run([EntryPattern(PredId(m.name, d.name, d.arity), domain.top(bases))])
    out = domain.bottom(bases)
    for v in an.table.get((d.name, d.arity), []):
        out = domain.lub(out, v.success)
    return out


# -- shapes post-processing ---------------------------------------------------------


def minimize_types(result: AnalysisResult) -> AnalysisResult:
    """Rename the types of a shapes result canonically and drop unreachable ones."""
    old: TypeTable = result.domain.table
    roots = []
    for e in result.entries:
        if not e.call.is_bottom:
            roots.extend(e.call.payload)
    for t in result.triples:
        for a in (t.call, t.success):
            if not a.is_bottom:
                roots.extend(a.payload)
    user_declared = [n for n in old.declared if n not in ("int", "num", "atm", "atomic", "list")]
    rename, defs = export_types(old, roots + user_declared)
    table = TypeTable(old.depth)
    for n in old.declared:
        if n in defs:
            table.declare(n, defs[n])
    for n, dd in defs.items():
        if n not in table.defs:
            table.define(n, dd)
    dom = Shapes(table)

    def conv(a: AbstractSubst) -> AbstractSubst:
        if a.is_bottom:
            return a
        return dom._make(a.vars, [rename.get(x, x) for x in a.payload])

    entries = [EntryPattern(e.pred, conv(e.call)) for e in result.entries]
    triples = [AnalysisTriple(t.pred, t.head, conv(t.call), conv(t.success)) for t in result.triples]
    return AnalysisResult(result.module, result.source_hash, result.domain_id, entries, triples,
                          dom, result.iterations, table_types(table))


def table_types(table: TypeTable) -> tuple:
    declared = set(table.declared)
    return tuple((n, n in declared, d) for n, d in table.defs.items() if n not in BUILTIN_DEFS)
