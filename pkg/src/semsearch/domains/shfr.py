"""Set-sharing with freeness.

An element is ``(sharing, free)``: ``sharing`` is a set of non-empty variable
groups (the variables whose bindings may contain a common variable) and ``free``
the variables that are definitely unbound. A variable in no group is ground.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Mapping, Optional, Sequence

from ..terms import Term, Var, term_vars
from .base import AbstractSubst, Domain, DomainMismatch

NAME = "shfr"

Group = frozenset


def star(groups: Iterable[frozenset]) -> set[frozenset]:
    """Closure under pairwise union."""
    out = set(groups)
    frontier = list(out)
    while frontier:
        new = []
        for g in frontier:
            for h in list(out):
                u = g | h
                if u not in out:
                    out.add(u)
                    new.append(u)
        frontier = new
    return out


def bin_union(xs: Iterable[frozenset], ys: Iterable[frozenset]) -> set[frozenset]:
    ys = list(ys)
    return {x | y for x in xs for y in ys}


def _make(vars, sharing, free) -> AbstractSubst:
    sharing = frozenset(g for g in sharing if g)
    covered = frozenset().union(*sharing) if sharing else frozenset()
    return AbstractSubst(NAME, tuple(vars), (sharing, frozenset(free) & covered))


class ShFr(Domain):
    name = NAME

    def top(self, vars: Sequence[Var]) -> AbstractSubst:
        vars = tuple(vars)
        groups = [frozenset(c) for r in range(1, len(vars) + 1)
                  for c in itertools.combinations(vars, r)]
        return _make(vars, groups, ())

    def element(self, vars: Sequence[Var], sharing: Iterable[Iterable[Var]],
                free: Iterable[Var] = ()) -> AbstractSubst:
        """Build an element; checks that mentioned variables are of interest."""
        vs = set(vars)
        sh = [frozenset(g) for g in sharing]
        fr = frozenset(free)
        for g in sh:
            if not g <= vs:
                raise DomainMismatch(f"sharing group {sorted(v.name for v in g)} outside {sorted(v.name for v in vs)}")
        covered = frozenset().union(*sh) if sh else frozenset()
        if not fr <= covered:
            raise DomainMismatch("a free variable must occur in some sharing group")
        return _make(vars, sh, fr)

    # -- lattice -------------------------------------------------------------
    def leq(self, a, b) -> bool:
        self.check(a, b)
        if a.is_bottom:
            return True
        if b.is_bottom:
            return False
        return a.payload[0] <= b.payload[0] and a.payload[1] >= b.payload[1]

    def lub(self, a, b):
        self.check(a, b)
        if a.is_bottom:
            return b
        if b.is_bottom:
            return a
        return _make(a.vars, a.payload[0] | b.payload[0], a.payload[1] & b.payload[1])

    def glb(self, a, b):
        self.check(a, b)
        if a.is_bottom or b.is_bottom:
            return self.bottom(a.vars)
        sh = a.payload[0] & b.payload[0]
        fr = a.payload[1] | b.payload[1]
        covered = frozenset().union(*sh) if sh else frozenset()
        if not fr <= covered:
            return self.bottom(a.vars)
        return _make(a.vars, sh, fr)

    # -- variable sets -------------------------------------------------------
    def project(self, a, vars):
        vars = tuple(vars)
        if a.is_bottom:
            return self.bottom(vars)
        keep = frozenset(vars)
        return _make(vars, {g & keep for g in a.payload[0]}, a.payload[1] & keep)

    def extend_fresh(self, a, new):
        vars = a.vars + tuple(v for v in new if v not in a.vars)
        if a.is_bottom:
            return self.bottom(vars)
        added = [v for v in new if v not in a.vars]
        return _make(vars, a.payload[0] | {frozenset([v]) for v in added},
                     a.payload[1] | frozenset(added))

    def rename(self, a, mapping: Mapping[Var, Var]):
        vars = tuple(mapping.get(v, v) for v in a.vars)
        if a.is_bottom:
            return self.bottom(vars)
        sh = {frozenset(mapping.get(v, v) for v in g) for g in a.payload[0]}
        return _make(vars, sh, {mapping.get(v, v) for v in a.payload[1]})

    def extend_call(self, state, call_vars, success):
        if state.is_bottom or success.is_bottom:
            return self.bottom(state.vars)
        c = frozenset(call_vars)
        sh_s, fr_s = success.payload
        rel = [g for g in state.payload[0] if g & c]
        irr = [g for g in state.payload[0] if not g & c]
        new = {g for g in star(rel) if (g & c) in sh_s}
        free = set()
        for v in state.payload[1]:
            if v in c:
                if v in fr_s:
                    free.add(v)
                continue
            if all((g & c) <= fr_s for g in rel if v in g):
                free.add(v)
        return _make(state.vars, set(irr) | new, free)

    def weaken(self, a):
        if a.is_bottom:
            return a
        return _make(a.vars, star(a.payload[0]), ())

    # -- transfer ------------------------------------------------------------
    def amgu(self, a, x: Var, t: Term):
        if a.is_bottom:
            return a
        if t == x:
            return a
        tv = frozenset(term_vars(t))
        if x in tv:
            return self.bottom(a.vars)  # occurs check
        sh, fr = a.payload
        rel_x = [g for g in sh if x in g]
        rel_t = [g for g in sh if g & tv]
        irr = [g for g in sh if x not in g and not g & tv]
        x_free = x in fr
        t_free = isinstance(t, Var) and t in fr
        if x_free or t_free:
            new = bin_union(rel_x, rel_t)
        else:
            new = bin_union(star(rel_x), star(rel_t))
        vx = frozenset().union(*rel_x) if rel_x else frozenset()
        vt = frozenset().union(*rel_t) if rel_t else frozenset()
        if x_free and t_free:
            free = set(fr)
        elif x_free:
            free = set(fr) - vx
        elif t_free:
            free = set(fr) - vt
        else:
            free = set(fr) - vx - vt
        return _make(a.vars, set(irr) | new, free)

    # -- concrete side -------------------------------------------------------
    def alpha(self, theta, vars):
        vars = tuple(vars)
        occ: dict[Var, set[Var]] = {}
        free = set()
        for x in vars:
            t = theta.get(x, x)
            if isinstance(t, Var):
                free.add(x)
            for v in term_vars(t):
                occ.setdefault(v, set()).add(x)
        return _make(vars, {frozenset(g) for g in occ.values()}, free)

    # -- rendering -----------------------------------------------------------
    def render(self, a, names: Optional[Mapping[Var, str]] = None, style: str = "pred") -> str:
        names = dict(names or {})
        if a.is_bottom:
            return "bottom"
        pos = {v: i for i, v in enumerate(a.vars)}
        nm = lambda v: names.get(v, v.name)
        sh, fr = a.payload
        groups = sorted((sorted(g, key=pos.get) for g in sh), key=lambda g: [pos[v] for v in g])
        parts = []
        if groups:
            parts.append("mshare([" + ",".join("[" + ",".join(nm(v) for v in g) + "]" for g in groups) + "])")
        parts += [f"var({nm(v)})" for v in a.vars if v in fr]
        covered = frozenset().union(*sh) if sh else frozenset()
        ground = [nm(v) for v in a.vars if v not in covered]
        if ground:
            parts.append("ground([" + ",".join(ground) + "])")
        return ", ".join(parts) if parts else "true"
