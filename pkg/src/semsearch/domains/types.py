"""Regular tree types as a table of deterministic named unions.

A type name ``n`` is defined by a ``TypeDef``: a set of leaf kinds (``int``,
``num``, ``atm``) plus at most one case per functor ``f/k`` giving the argument
types. ``term`` (everything) and ``bot`` (nothing) are never defined. Only
integers are numbers, but ``int`` is kept below ``num``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Union

TERM = "term"
BOT = "bot"
LEAVES = ("int", "num", "atm")
Functor = Union[str, int]


@dataclass(frozen=True)
class TypeDef:
    leaves: frozenset = frozenset()
    cases: tuple = ()  # sorted ((functor, arity), (arg names...)) pairs

    @staticmethod
    def make(leaves: Iterable[str] = (), cases: Mapping = None) -> "TypeDef":
        lv = set(leaves)
        if "num" in lv:
            lv.discard("int")
        cs = dict(cases or {})
        if "atm" in lv:
            cs = {k: v for k, v in cs.items() if not (k[1] == 0 and isinstance(k[0], str))}
        items = sorted(cs.items(), key=lambda kv: (kv[0][1], str(kv[0][0]), isinstance(kv[0][0], int)))
        return TypeDef(frozenset(lv), tuple((k, tuple(v)) for k, v in items))

    @property
    def case_map(self) -> dict:
        return dict(self.cases)

    @property
    def principal(self) -> tuple:
        return (self.leaves, tuple(k for k, _ in self.cases))

    def children(self) -> list[str]:
        return [a for _, args in self.cases for a in args]


BUILTIN_DEFS = {
    "int": TypeDef.make(["int"]),
    "num": TypeDef.make(["num"]),
    "atm": TypeDef.make(["atm"]),
    "atomic": TypeDef.make(["num", "atm"]),
    "list": TypeDef.make((), {("[]", 0): (), (".", 2): (TERM, "list")}),
}


class TypeTable:
    """Append-only store of type definitions with memoized lattice operations."""

    def __init__(self, depth: int = 3):
        self.defs: dict[str, TypeDef] = dict(BUILTIN_DEFS)
        self.declared: list[str] = list(BUILTIN_DEFS)  # widening targets, naming preferences
        self.depth = depth
        self._hashcons: dict[TypeDef, str] = {d: n for n, d in BUILTIN_DEFS.items()}
        self._fresh = itertools.count(1)
        self._glb: dict = {}
        self._lub: dict = {}
        self._leq: dict = {}
        self._nonempty: dict[str, bool] = {}

    def copy(self) -> "TypeTable":
        t = TypeTable(self.depth)
        t.defs = dict(self.defs)
        t.declared = list(self.declared)
        t._hashcons = dict(self._hashcons)
        t._fresh = itertools.count(next(self._fresh))
        t._leq = dict(self._leq)
        t._nonempty = dict(self._nonempty)
        return t

    # -- construction --------------------------------------------------------
    def reserve(self) -> str:
        while True:
            name = f"${next(self._fresh)}"
            if name not in self.defs:
                return name

    def define(self, name: str, d: TypeDef) -> str:
        self.defs[name] = d
        return name

    def make(self, leaves: Iterable[str] = (), cases: Mapping = None) -> str:
        d = TypeDef.make(leaves, cases)
        if not d.leaves and not d.cases:
            return BOT
        if d in self._hashcons:
            return self._hashcons[d]
        name = self.define(self.reserve(), d)
        self._hashcons[d] = name
        return name

    def declare(self, name: str, d: TypeDef) -> str:
        """Add a named (user or builtin) type, preferred for naming and widening."""
        self.defs[name] = d
        if name not in self.declared:
            self.declared.append(name)
        self._hashcons.setdefault(d, name)
        return name

    def list_of(self, elem: str) -> str:
        name = f"list({elem})"
        if name not in self.defs:
            self.declare(name, TypeDef.make((), {("[]", 0): (), (".", 2): (elem, name)}))
        return name

    def atom_type(self, functor: Functor) -> str:
        if isinstance(functor, int):
            return "int"
        return self.make((), {(functor, 0): ()})

    def struct_type(self, functor: Functor, args: Iterable[str]) -> str:
        args = tuple(args)
        if not args:
            return self.atom_type(functor)
        if any(self.is_empty(a) for a in args):
            return BOT
        return self.make((), {(functor, len(args)): args})

    def get(self, name: str) -> TypeDef:
        return self.defs[name]

    # -- emptiness -----------------------------------------------------------
    def reachable(self, name: str) -> list[str]:
        seen, order, stack = set(), [], [name]
        while stack:
            n = stack.pop()
            if n in seen or n in (TERM, BOT):
                continue
            seen.add(n)
            order.append(n)
            stack.extend(reversed(self.defs[n].children()))
        return order

    def is_empty(self, name: str) -> bool:
        if name == TERM:
            return False
        if name == BOT:
            return True
        if name in self._nonempty:
            return not self._nonempty[name]
        nodes = self.reachable(name)
        ne = {n: self._nonempty.get(n, False) for n in nodes}
        ne[TERM], ne[BOT] = True, False
        changed = True
        while changed:
            changed = False
            for n in nodes:
                if ne[n]:
                    continue
                d = self.defs[n]
                if d.leaves or any(all(ne[a] for a in args) for _, args in d.cases):
                    ne[n] = True
                    changed = True
        for n in nodes:
            self._nonempty[n] = ne[n]
        return not ne[name]

    # -- inclusion -----------------------------------------------------------
    def leq(self, s: str, t: str) -> bool:
        if s == t or t == TERM or s == BOT:
            return True
        key = (s, t)
        if key in self._leq:
            return self._leq[key]
        result = self._sim(s, t, set())
        self._leq[key] = result
        return result

    def _sim(self, s: str, t: str, assumed: set) -> bool:
        if s == t or t == TERM or s == BOT or self.is_empty(s):
            return True
        if s == TERM or t == BOT:
            return False
        if (s, t) in assumed:
            return True
        known = self._leq.get((s, t))
        if known is not None:
            return known
        assumed.add((s, t))
        sd, td = self.defs[s], self.defs[t]
        for leaf in sd.leaves:
            if leaf == "int" and not (td.leaves & {"int", "num"}):
                return False
            if leaf in ("num", "atm") and leaf not in td.leaves:
                return False
        tcases = td.case_map
        for (f, n), args in sd.cases:
            if any(self.is_empty(a) for a in args):
                continue
            if n == 0 and isinstance(f, str) and "atm" in td.leaves:
                continue
            targs = tcases.get((f, n))
            if targs is None:
                return False
            if not all(self._sim(a, b, assumed) for a, b in zip(args, targs)):
                return False
        return True

    def equiv(self, s: str, t: str) -> bool:
        return self.leq(s, t) and self.leq(t, s)

    # -- meet / join ---------------------------------------------------------
    def glb(self, s: str, t: str) -> str:
        out = self._glb_rec(s, t)
        return BOT if self.is_empty(out) else out

    def _glb_rec(self, s: str, t: str) -> str:
        if s == t or t == TERM:
            return s
        if s == TERM:
            return t
        if s == BOT or t == BOT:
            return BOT
        key = (s, t) if s <= t else (t, s)
        if key in self._glb:
            return self._glb[key]
        if self.leq(s, t):
            self._glb[key] = s
            return s
        if self.leq(t, s):
            self._glb[key] = t
            return t
        name = self.reserve()
        self._glb[key] = name
        sd, td = self.defs[s], self.defs[t]
        leaves = set()
        if ("int" in sd.leaves and td.leaves & {"int", "num"}) or ("int" in td.leaves and sd.leaves & {"int", "num"}):
            leaves.add("int")
        for leaf in ("num", "atm"):
            if leaf in sd.leaves and leaf in td.leaves:
                leaves.add(leaf)
        cases = {}
        tmap = td.case_map
        for (f, n), args in sd.cases:
            if (f, n) in tmap:
                cases[(f, n)] = tuple(self._glb_rec(a, b) for a, b in zip(args, tmap[(f, n)]))
            elif n == 0 and isinstance(f, str) and "atm" in td.leaves:
                cases[(f, n)] = ()
        smap = sd.case_map
        for (f, n), args in td.cases:
            if (f, n) not in smap and n == 0 and isinstance(f, str) and "atm" in sd.leaves:
                cases[(f, n)] = ()
        self.define(name, TypeDef.make(leaves, cases))
        return name

    def lub(self, s: str, t: str) -> str:
        if s == t or s == BOT:
            return t
        if t == BOT:
            return s
        if s == TERM or t == TERM:
            return TERM
        key = (s, t) if s <= t else (t, s)
        if key in self._lub:
            return self._lub[key]
        if self.leq(s, t):
            self._lub[key] = t
            return t
        if self.leq(t, s):
            self._lub[key] = s
            return s
        name = self.reserve()
        self._lub[key] = name
        sd, td = self.defs[s], self.defs[t]
        cases = dict(sd.case_map)
        for k, args in td.cases:
            if k in cases:
                cases[k] = tuple(self.lub(a, b) for a, b in zip(cases[k], args))
            else:
                cases[k] = args
        self.define(name, TypeDef.make(sd.leaves | td.leaves, cases))
        return name

    # -- widening ------------------------------------------------------------
    def copy_graph(self, root: str, redirect: Mapping[str, str]) -> str:
        """Copy the graph below ``root``, replacing nodes in ``redirect`` by copies of their targets."""
        memo: dict[str, str] = {}

        def go(n: str) -> str:
            n = redirect.get(n, n)
            if n in (TERM, BOT):
                return n
            if n in memo:
                return memo[n]
            new = self.reserve()
            memo[n] = new
            d = self.defs[n]
            self.define(new, TypeDef(d.leaves, tuple((k, tuple(go(a) for a in args)) for k, args in d.cases)))
            return new

        return go(root)

    def _fold_candidate(self, root: str) -> Optional[tuple[str, str]]:
        """First (ancestor, descendant) pair with one functor set where the descendant is included."""
        path: list[str] = []
        on_path: set[str] = set()
        declared = set(self.declared)
        done: set[str] = set()

        def dfs(n: str):
            path.append(n)
            on_path.add(n)
            for c in self.defs[n].children():
                if c in (TERM, BOT) or c in on_path or c in declared:
                    continue  # named types are finite already; only fresh structure is folded
                pc = self.defs[c].principal
                for a in path:
                    if self.defs[a].principal == pc and self.leq(c, a):
                        return (a, c)
                if c not in done:
                    r = dfs(c)
                    if r:
                        return r
            path.pop()
            on_path.discard(n)
            done.add(n)
            return None

        if root in (TERM, BOT):
            return None
        return dfs(root)

    def shorten(self, root: str, rounds: int = 12) -> str:
        """Fold fresh descendants into including ancestors that have the same functor set.

        Growth that no fold absorbs is cut by ``truncate``.
        """
        for _ in range(rounds):
            cand = self._fold_candidate(root)
            if cand is None:
                return root
            a, c = cand
            root = self.copy_graph(root, {c: a})
        return root

    def named_supertype(self, name: str) -> str:
        """Smallest declared supertype; a node holding ``[]`` prefers list-shaped ones."""
        cands = list(self.declared)
        if name not in (TERM, BOT) and ("[]", 0) in self.defs[name].case_map:
            listy = [c for c in cands if (".", 2) in self.defs[c].case_map]
            if any(self.leq(name, c) for c in listy):
                cands = listy
        best = None
        for cand in cands:
            if self.leq(name, cand) and (best is None or self.leq(cand, best)):
                best = cand
        return best or TERM

    def truncate(self, root: str, depth: Optional[int] = None) -> str:
        k = self.depth if depth is None else depth
        memo: dict[str, str] = {}

        def go(n: str, level: int) -> str:
            if n in (TERM, BOT) or n in self.declared:
                return n
            if n in memo:
                return memo[n]
            if level >= k:
                return self.named_supertype(n)
            new = self.reserve()
            memo[n] = new
            d = self.defs[n]
            self.define(new, TypeDef(d.leaves, tuple((key, tuple(go(a, level + 1) for a in args))
                                                     for key, args in d.cases)))
            return new

        return go(root, 0)

    def widen(self, old: str, new: str) -> str:
        if self.leq(new, old):
            return old
        w = self.lub(old, new)
        if w in (TERM, BOT) or w in self.declared:
            return w
        w = self.truncate(self.shorten(w))
        for cand in self.declared:
            if self.equiv(w, cand):
                return cand
        return w
