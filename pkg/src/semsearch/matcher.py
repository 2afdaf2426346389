"""Verdicts for assertion conditions against analysis results, and the findp search.

Each condition gets one verdict per domain (``checked``, ``false`` or
``check``). Verdicts are combined across domains (any ``false`` wins, then any
``checked``) and then across conditions into the overall status of a
predicate.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

from .analysis import (
    AnalysisConfig,
    AnalysisResult,
    ImportsDB,
    make_context,
    new_domain,
    reanalyze_from,
)
from .assertions import (
    AssertionCondition,
    AssertionSyntaxError,
    Calls,
    PredicateQuery,
    Success,
    assertion_from_term,
    rename_dnf,
)
from .domains.base import AbstractSubst, Domain
from .domains.props import (
    PropContext,
    PropDef,
    UnknownProperty,
    abstract_prop,
    literal_approx,
    ts_over,
)
from .domains.shapes import Shapes
from .lang import Module, PredId, _pred_spec, base_vars, clause_from_term
from .reader import ParseError, Reader
from .terms import Struct, Var, format_term

CHECKED = "checked"
FALSE = "false"
CHECK = "check"
STATUSES = (CHECKED, FALSE, CHECK)
_ORDER = {CHECKED: 0, CHECK: 1, FALSE: 2}

NOTES = ("accuracy_limit", "refine_suggested", "no_triples", "no_success",
         "unknown_property", "per_literal")


class SoundnessError(Exception):
    """Two domains proved a condition both checked and false."""


@dataclass(frozen=True)
class ConditionStatus:
    status: str
    note: Optional[str] = None

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"bad status {self.status!r}")

    def __str__(self) -> str:
        return self.status if self.note is None else f"{self.status} ({self.note})"


@dataclass(frozen=True)
class ResidueEntry:
    condition: AssertionCondition
    verdicts: tuple  # ((domain_id, ConditionStatus), ...)
    status: str
    note: Optional[str] = None

    def __str__(self) -> str:
        vs = " ".join(f"[{d}: {v}]" for d, v in self.verdicts)
        tail = f" ({self.note})" if self.note else ""
        return f"{self.condition}  {vs} => {self.status}{tail}"


@dataclass(frozen=True)
class MatchResult:
    pred: PredId
    residue: tuple
    status: str
    refined: bool = False

    def sort_key(self):
        return (_ORDER[self.status], self.pred.module, self.pred.name, self.pred.arity)


# -- query text --------------------------------------------------------------------

_FINDP = re.compile(r"^\s*(?:\?-\s*)?findp\s*\(\s*\{(?P<body>.*)\}\s*,(?P<rest>.*)\)\s*\.?\s*$", re.S)


def parse_query(text: str, keywords: Sequence[str] = ()) -> PredicateQuery:
    """A ``findp({...}, M:P/A, Residue, Status)`` goal or a bare block of query assertions.

    The block may also declare and define the properties the assertions use.
    """
    status = None
    m = _FINDP.match(text)
    if m:
        body = m.group("body")
        rest = Reader(f"f({m.group('rest')}) .").read_clause().term
        if not isinstance(rest, Struct) or len(rest.args) != 3:
            raise ParseError("findp expects four arguments", 1, 1)
        st = rest.args[2]
        if isinstance(st, Struct) and not st.args:
            if st.functor not in STATUSES:
                raise ParseError(f"unknown status {st.functor}", 1, 1)
            status = str(st.functor)
        elif not isinstance(st, Var):
            raise ParseError("Status must be a variable or a status name", 1, 1)
    else:
        body = text
    asserts, defs, decls = [], [], []
    for rc in Reader(body).read_all():
        t = rc.term
        if isinstance(t, Struct) and t.functor in (":-", "?-") and t.arity == 1:
            d = t.args[0]
            if isinstance(d, Struct) and d.functor in ("regtype", "prop") and d.arity == 1:
                name, arity = _pred_spec(d.args[0], rc.line, rc.col)
                decls.append((name, arity, d.functor))
                continue
            try:
                a = assertion_from_term(d, rc.line, rc.col)
            except AssertionSyntaxError as e:
                raise ParseError(str(e), rc.line, rc.col) from None
            if a is None or not a.is_query:
                raise ParseError("expected a query assertion", rc.line, rc.col, format_term(d))
            asserts.append(a)
            continue
        defs.append(clause_from_term(t, rc.line, rc.col))
    declared = {(n, a) for n, a, _ in decls}
    for c in defs:
        if c.key not in declared:
            decls.append((c.key[0], c.key[1], "prop"))
            declared.add(c.key)
    try:
        return PredicateQuery(tuple(asserts), tuple(defs), tuple(decls), status, tuple(keywords))
    except AssertionSyntaxError as e:
        raise ParseError(str(e), 1, 1) from None


# -- a module as seen by the matcher --------------------------------------------


@dataclass
class DomainView:
    """One analysis result plus the domain session used to interpret query formulas."""

    result: AnalysisResult
    domain: Domain
    ctx: PropContext

    @classmethod
    def open(cls, result: AnalysisResult, module: Module, imports: Optional[ImportsDB],
             query_defs: Sequence[PropDef] = ()) -> "DomainView":
        base = result.domain
        if isinstance(base, Shapes):
            dom = Shapes(base.table.copy())
        else:
            dom = base
        return cls(result, dom, make_context(module, imports, query_defs))

    def triples(self, pred: PredId):
        return self.result.triples_for(pred.name, pred.arity)


def _to_base(cond: AssertionCondition, arity: int):
    head_args = cond.head.args[1:] if cond.head.functor == "$apply" else cond.head.args
    bases = base_vars(arity)
    mapping = dict(zip(head_args, bases))
    pre = rename_dnf(cond.pre, mapping)
    post = rename_dnf(cond.post, mapping) if isinstance(cond, Success) else None
    return bases, pre, post


def _under_leq(dom: Domain, a: AbstractSubst, dnf, bases, ctx) -> bool:
    """a ⊑ an under-approximation of some disjunct of ``dnf``."""
    for conj in dnf:
        u = abstract_prop(conj, dom, bases, ctx).under
        if u is not None and dom.leq(a, u):
            return True
    return False


# -- per-domain verdicts -----------------------------------------------------------


def check_calls(cond: Calls, pred: PredId, view: DomainView) -> ConditionStatus:
    dom, ctx = view.domain, view.ctx
    triples = view.triples(pred)
    if not triples:
        return ConditionStatus(CHECK, "no_triples")
    bases, pre, _ = _to_base(cond, pred.arity)
    if all(_under_leq(dom, t.call, pre, bases, ctx) for t in triples):
        return ConditionStatus(CHECKED)
    over = ts_over(pre, dom, bases, ctx)
    if all(dom.glb(t.call, over).is_bottom for t in triples):
        return ConditionStatus(FALSE)
    return ConditionStatus(CHECK)


def check_success(cond: Success, pred: PredId, view: DomainView) -> ConditionStatus:
    dom, ctx = view.domain, view.ctx
    triples = view.triples(pred)
    if not triples:
        return ConditionStatus(CHECK, "no_triples")
    bases, pre, post = _to_base(cond, pred.arity)
    pre_over = ts_over(pre, dom, bases, ctx)
    group = [t for t in triples if dom.equal(t.call, pre_over)]
    note = "accuracy_limit"
    if not group:
        group = [t for t in triples if dom.leq(pre_over, t.call)]
        note = "refine_suggested"
    if not group:
        return ConditionStatus(CHECK, "refine_suggested")
    # any covering triple over-approximates every success from a call in TS(Pre)
    for t in group:
        if _under_leq(dom, t.success, post, bases, ctx):
            return ConditionStatus(CHECKED, "no_success" if t.success.is_bottom else None)
    post_over = ts_over(post, dom, bases, ctx)
    for t in group:
        if _under_leq(dom, t.call, pre, bases, ctx) and dom.glb(t.success, post_over).is_bottom:
            return ConditionStatus(FALSE)
    return ConditionStatus(CHECK, note)


def check_condition(cond: AssertionCondition, pred: PredId, view: DomainView) -> ConditionStatus:
    try:
        if isinstance(cond, Calls):
            return check_calls(cond, pred, view)
        return check_success(cond, pred, view)
    except UnknownProperty:
        return ConditionStatus(CHECK, "unknown_property")


def per_literal_calls(cond: Calls, pred: PredId, views: Sequence[DomainView]) -> bool:
    """Every literal of a one-conjunction Pre is proved on all calls by some domain."""
    if len(cond.pre) != 1 or not cond.pre[0]:
        return False
    bases, pre, _ = _to_base(cond, pred.arity)
    for lit in pre[0]:
        proved = False
        for v in views:
            triples = v.triples(pred)
            if not triples:
                continue
            try:
                u = literal_approx(lit, v.domain, bases, v.ctx).under
            except UnknownProperty:
                continue
            if u is not None and all(v.domain.leq(t.call, u) for t in triples):
                proved = True
                break
        if not proved:
            return False
    return True


def combine_domains(verdicts: Sequence[tuple[str, ConditionStatus]]) -> str:
    """``false`` if any domain says false, else ``checked`` if any does, else ``check``."""
    falses = [d for d, v in verdicts if v.status == FALSE]
    checks = [d for d, v in verdicts if v.status == CHECKED and v.note != "no_success"]
    if falses and checks:
        raise SoundnessError(f"contradictory verdicts: {', '.join(falses)} false, {', '.join(checks)} checked")
    if falses:
        return FALSE
    if any(v.status == CHECKED for _, v in verdicts):
        return CHECKED
    return CHECK


def overall_status(statuses: Iterable[str]) -> str:
    statuses = list(statuses)
    if FALSE in statuses:
        return FALSE
    if statuses and all(s == CHECKED for s in statuses):
        return CHECKED
    return CHECK


def residue_entry(cond: AssertionCondition, pred: PredId, views: Sequence[DomainView]) -> ResidueEntry:
    verdicts = tuple((v.result.domain_id, check_condition(cond, pred, v)) for v in views)
    status = combine_domains(verdicts)
    note = None
    if status == CHECK and isinstance(cond, Calls) and len(views) > 1 and per_literal_calls(cond, pred, views):
        status, note = CHECKED, "per_literal"
    return ResidueEntry(cond, verdicts, status, note)


def match_predicate(query: PredicateQuery, pred: PredId, views: Sequence[DomainView]) -> MatchResult:
    residue = tuple(residue_entry(c, pred, views) for c in query.conditions())
    return MatchResult(pred, residue, overall_status(e.status for e in residue))


# -- refinement ----------------------------------------------------------------------


def refine_and_recheck(query: PredicateQuery, pred: PredId, module: Module, views: Sequence[DomainView],
                       imports: Optional[ImportsDB], query_defs: Sequence[PropDef] = (),
                       config: AnalysisConfig = AnalysisConfig(),
                       base: Optional[MatchResult] = None) -> MatchResult:
    """Reanalyze ``pred`` from the call of each success condition left open for lack of a covering call."""
    base = base or match_predicate(query, pred, views)
    new_residue = []
    refined = False
    for entry in base.residue:
        cond = entry.condition
        if not isinstance(cond, Success) or entry.status != CHECK or \
                not any(v.note == "refine_suggested" for _, v in entry.verdicts):
            new_residue.append(entry)
            continue
        verdicts = []
        for (dom_id, old), view in zip(entry.verdicts, views):
            if old.note != "refine_suggested":
                verdicts.append((dom_id, old))
                continue
            dom = new_domain(dom_id, config)
            ctx = make_context(module, imports, query_defs)
            bases, pre, _ = _to_base(cond, pred.arity)
            try:
                call = ts_over(pre, dom, bases, ctx)
            except UnknownProperty:
                verdicts.append((dom_id, old))
                continue
            if call.is_bottom:
                verdicts.append((dom_id, old))
                continue
            res = reanalyze_from(module, dom_id, pred, call, imports, domain=dom, ctx=ctx,
                                 config=config, minimize=False)
            new = check_condition(cond, pred, DomainView(res, dom, ctx))
            refined = True
            verdicts.append((dom_id, new if new.status != CHECK or old.status == CHECK else old))
        status = combine_domains(verdicts)
        new_residue.append(ResidueEntry(cond, tuple(verdicts), status, entry.note))
    residue = tuple(new_residue)
    return MatchResult(pred, residue, overall_status(e.status for e in residue), refined or base.refined)


# -- findp -----------------------------------------------------------------------------


@dataclass(frozen=True)
class FindOptions:
    domains: tuple = ("shfr", "shapes")
    refine: bool = False
    required_status: Optional[str] = None
    keywords: tuple = ()
    config: AnalysisConfig = AnalysisConfig()


@dataclass
class CorpusModule:
    """What findp needs about one module: source, imports and per-domain results."""

    module: Module
    results: dict  # domain_id -> AnalysisResult
    imports: Optional[ImportsDB] = None
    doc: str = ""


def query_prop_defs(query: PredicateQuery) -> list[PropDef]:
    defs = []
    for name, arity, kind in query.prop_decls:
        clauses = tuple(c for c in query.definitions if c.head.functor == name and len(c.head.args) == arity)
        defs.append(PropDef(name, arity, kind, clauses, "$query"))
    return defs


def _keyword_ok(cm: CorpusModule, pred: PredId, keywords: Sequence[str]) -> bool:
    if not keywords:
        return True
    docs = " ".join(a.doc or "" for a in cm.module.assertions if (a.name, a.arity) == pred.key)
    hay = f"{pred.name} {pred.module} {docs}".lower()
    return all(k.lower() in hay for k in keywords)


def candidates(cm: CorpusModule, arity: int) -> list[PredId]:
    return [p for p in cm.module.exports if p.arity == arity and not cm.module.is_property(p.key)]


def findp(query: PredicateQuery, corpus: Iterable[CorpusModule],
          options: FindOptions = FindOptions()) -> Iterator[MatchResult]:
    """Match every exported predicate of the query's arity; yields in the deterministic order."""
    qdefs = query_prop_defs(query)
    required = options.required_status or query.required_status
    keywords = tuple(options.keywords) + tuple(query.keywords)
    out: list[MatchResult] = []
    for cm in corpus:
        preds = [p for p in candidates(cm, query.arity) if _keyword_ok(cm, p, keywords)]
        if not preds:
            continue
        views = [DomainView.open(cm.results[d], cm.module, cm.imports, qdefs)
                 for d in options.domains if d in cm.results]
        if not views:
            continue
        for p in preds:
            r = match_predicate(query, p, views)
            if options.refine and r.status == CHECK:
                r = refine_and_recheck(query, p, cm.module, views, cm.imports, qdefs, options.config, r)
            if required is None or r.status == required:
                out.append(r)
    out.sort(key=MatchResult.sort_key)
    yield from out
