"""Regular-type environments: each variable of interest is mapped to a type name."""

from __future__ import annotations

from typing import Mapping, Optional, Sequence

from ..terms import Str, Struct, Term, Var, term_vars
from .base import AbstractSubst, Domain, DomainMismatch
from .types import BOT, BUILTIN_DEFS, TERM, TypeDef, TypeTable

NAME = "shapes"


class Shapes(Domain):
    name = NAME

    def __init__(self, table: Optional[TypeTable] = None):
        self.table = table if table is not None else TypeTable()

    def _make(self, vars, types) -> AbstractSubst:
        types = tuple(types)
        if any(t == BOT or self.table.is_empty(t) for t in types):
            return self.bottom(vars)
        return AbstractSubst(NAME, tuple(vars), types)

    def element(self, vars: Sequence[Var], types: Mapping[Var, str]) -> AbstractSubst:
        unknown = set(types) - set(vars)
        if unknown:
            raise DomainMismatch(f"types given for variables outside the element: {sorted(v.name for v in unknown)}")
        return self._make(vars, [types.get(v, TERM) for v in vars])

    def type_of(self, a: AbstractSubst, v: Var) -> str:
        if a.is_bottom:
            return BOT
        return a.payload[a.vars.index(v)]

    def _env(self, a) -> dict[Var, str]:
        return dict(zip(a.vars, a.payload))

    def _aligned(self, b, vars):
        env = self._env(b)
        return [env[v] for v in vars]

    # -- lattice -------------------------------------------------------------
    def top(self, vars):
        return AbstractSubst(NAME, tuple(vars), tuple(TERM for _ in vars))

    def leq(self, a, b):
        self.check(a, b)
        if a.is_bottom:
            return True
        if b.is_bottom:
            return False
        return all(self.table.leq(s, t) for s, t in zip(a.payload, self._aligned(b, a.vars)))

    def lub(self, a, b):
        self.check(a, b)
        if a.is_bottom:
            return self.project(b, a.vars)
        if b.is_bottom:
            return a
        return self._make(a.vars, [self.table.lub(s, t) for s, t in zip(a.payload, self._aligned(b, a.vars))])

    def glb(self, a, b):
        self.check(a, b)
        if a.is_bottom or b.is_bottom:
            return self.bottom(a.vars)
        return self._make(a.vars, [self.table.glb(s, t) for s, t in zip(a.payload, self._aligned(b, a.vars))])

    def widen(self, a, b):
        self.check(a, b)
        if a.is_bottom:
            return self.project(b, a.vars)
        if b.is_bottom:
            return a
        return self._make(a.vars, [self.table.widen(s, t) for s, t in zip(a.payload, self._aligned(b, a.vars))])

    # -- variable sets -------------------------------------------------------
    def project(self, a, vars):
        vars = tuple(vars)
        if a.is_bottom:
            return self.bottom(vars)
        env = self._env(a)
        return AbstractSubst(NAME, vars, tuple(env.get(v, TERM) for v in vars))

    def extend_fresh(self, a, new):
        added = tuple(v for v in new if v not in a.vars)
        vars = a.vars + added
        if a.is_bottom:
            return self.bottom(vars)
        return AbstractSubst(NAME, vars, a.payload + tuple(TERM for _ in added))

    def rename(self, a, mapping):
        vars = tuple(mapping.get(v, v) for v in a.vars)
        if a.is_bottom:
            return self.bottom(vars)
        return AbstractSubst(NAME, vars, a.payload)

    def extend_call(self, state, call_vars, success):
        if state.is_bottom or success.is_bottom:
            return self.bottom(state.vars)
        senv = self._env(success)
        types = [self.table.glb(t, senv[v]) if v in senv else t
                 for v, t in zip(state.vars, state.payload)]
        return self._make(state.vars, types)

    # -- transfer ------------------------------------------------------------
    def term_type(self, t: Term, env: Mapping[Var, str]) -> str:
        if isinstance(t, Var):
            return env.get(t, TERM)
        if isinstance(t, Str):
            return TERM
        if not t.args:
            return self.table.atom_type(t.functor)
        return self.table.struct_type(t.functor, [self.term_type(a, env) for a in t.args])

    def _constraints(self, t: Term, ty: str, out: dict[Var, str]) -> bool:
        """Push type ``ty`` down into the variables of ``t``; False if some path is empty."""
        if isinstance(t, Var):
            out[t] = self.table.glb(out.get(t, TERM), ty)
            return out[t] != BOT
        if not isinstance(t, Struct) or not t.args or ty == TERM:
            if ty == TERM and isinstance(t, Struct):
                for a in t.args:
                    for v in term_vars(a):
                        out.setdefault(v, TERM)
            return True
        args = self.table.get(ty).case_map.get((t.functor, len(t.args)))
        if args is None:
            return False
        return all(self._constraints(a, at, out) for a, at in zip(t.args, args))

    def amgu(self, a, x, t):
        if a.is_bottom or t == x:
            return a
        if x in term_vars(t):
            return self.bottom(a.vars)  # occurs check
        env = self._env(a)
        g = self.table.glb(env.get(x, TERM), self.term_type(t, env))
        if g == BOT:
            return self.bottom(a.vars)
        out = {x: g}
        if not self._constraints(t, g, out):
            return self.bottom(a.vars)
        for v, ty in out.items():
            env[v] = self.table.glb(env.get(v, TERM), ty) if v != x else ty
        return self._make(a.vars, [env[v] for v in a.vars])

    # -- concrete side -------------------------------------------------------
    def type_of_term(self, t: Term) -> str:
        return self.term_type(t, {})

    def alpha(self, theta, vars):
        vars = tuple(vars)
        return self._make(vars, [self.type_of_term(theta.get(v, v)) for v in vars])

    # -- rendering -----------------------------------------------------------
    def render(self, a, names: Optional[Mapping[Var, str]] = None, style: str = "pred",
               type_names: Optional[Mapping[str, str]] = None) -> str:
        names = dict(names or {})
        tn = type_names or {}
        if a.is_bottom:
            return "bottom"
        parts = []
        for v, t in zip(a.vars, a.payload):
            nm = names.get(v, v.name)
            t = tn.get(t, t)
            if style == "pred":
                parts.append(render_type_literal(t, nm))
            else:
                parts.append(f"{nm}:{t}")
        return ", ".join(parts) if parts else "true"


def render_type_literal(type_name: str, var_text: str) -> str:
    """``b`` and ``A`` give ``b(A)``; ``list(b)`` gives ``list(A,b)``."""
    if type_name.startswith("list(") and type_name.endswith(")"):
        return f"list({var_text},{type_name[5:-1]})"
    return f"{type_name}({var_text})"


def export_types(table: TypeTable, roots: Sequence[str], reserved: Sequence[str] = ()):
    """Minimize the types reachable from ``roots``.

    Returns ``(rename, defs)``: ``rename`` maps every reachable name to its display
    name (a declared name when equivalent to one, else ``t1``, ``t2``, ...) and
    ``defs`` gives the definitions of all non-builtin display names in order.
    """
    order: list[str] = []
    seen = set()
    for r in roots:
        for n in table.reachable(r):
            if n not in seen:
                seen.add(n)
                order.append(n)
    rename: dict[str, str] = {TERM: TERM, BOT: BOT}
    taken = set(table.declared) | set(reserved) | {TERM, BOT}
    synth: list[tuple[str, str]] = []  # (representative, display)
    counter = 0
    for n in order:
        if table.is_empty(n):
            rename[n] = BOT
            continue
        if n in table.declared:
            rename[n] = n
            continue
        hit = next((d for d in table.declared if table.equiv(n, d)), None)
        if hit is None:
            hit = next((disp for rep, disp in synth if table.equiv(n, rep)), None)
        if hit is None:
            counter += 1
            while f"t{counter}" in taken:
                counter += 1
            hit = f"t{counter}"
            taken.add(hit)
            synth.append((n, hit))
        rename[n] = hit
    defs: dict[str, TypeDef] = {}
    pending = [rename[n] for n in order]
    reps = {disp: rep for rep, disp in synth}
    while pending:
        disp = pending.pop(0)
        if disp in defs or disp in (TERM, BOT) or disp in BUILTIN_DEFS:
            continue
        src = reps.get(disp, disp)
        d = table.get(src)
        cases = {}
        for k, args in d.cases:
            new_args = [rename[arg] for arg in args]
            if BOT in new_args:
                continue
            cases[k] = tuple(new_args)
            pending.extend(new_args)
        defs[disp] = TypeDef.make(d.leaves, cases)
    return rename, defs
