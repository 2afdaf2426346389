"""Bounded SLD interpreter used as a testing oracle.

Leftmost selection, clauses in source order, occurs check always on. The
bound counts total resolution steps (user and builtin literal selections)
over the whole search.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .lang import Clause, Module, PredId, base_vars
from .terms import NIL, Struct, Term, Var, conj_to_list, is_int, iter_vars, substitute, term_vars

DEFAULT_STEPS = 10_000

Subst = dict  # Var -> Term

# the standard list property, available to every program
_LIST_CLAUSES = (
    Clause(Struct("list", (NIL,))),
    Clause(Struct("list", (Struct(".", (Var("_"), Var("T"))),)), (Struct("list", (Var("T"),)),)),
)

_FROZEN = "$frozen"


class UnknownPredicate(Exception):
    def __init__(self, name: str, arity: int):
        super().__init__(f"unknown predicate {name}/{arity}")
        self.name = name
        self.arity = arity


class InstantiationError(Exception):
    pass


@dataclass(frozen=True)
class CallSuccessPair:
    pred: PredId
    call: Mapping[Var, Term]
    success: Optional[Mapping[Var, Term]]
    depth: int

    def args(self, which: str = "call") -> tuple[Term, ...]:
        s = self.call if which == "call" else self.success
        return tuple(s.values())


@dataclass
class SolveResult:
    answers: list
    complete: bool

    def __iter__(self):
        return iter((self.answers, self.complete))


class _Exit:
    __slots__ = ("index",)

    def __init__(self, index: int):
        self.index = index


class Program:
    """A (merged) set of modules indexed by predicate key."""

    def __init__(self, modules: Iterable[Module] = (), clauses: Iterable[Clause] = ()):
        self.preds: dict[tuple[str, int], list[Clause]] = {}
        self.owner: dict[tuple[str, int], str] = {}
        for m in modules:
            for key, cs in m.clauses.items():
                self.preds.setdefault(key, []).extend(cs)
                self.owner.setdefault(key, m.name)
        for c in clauses:
            self.preds.setdefault(c.key, []).append(c)
            self.owner.setdefault(c.key, "user")
        if ("list", 1) not in self.preds:
            self.preds[("list", 1)] = list(_LIST_CLAUSES)
            self.owner[("list", 1)] = "builtin"

    def pred_id(self, key: tuple[str, int]) -> PredId:
        return PredId(self.owner.get(key, "builtin"), key[0], key[1])


class Machine:
    """One search over a program with a trail-based binding store."""

    def __init__(self, program: Program, max_steps: int = DEFAULT_STEPS, record: bool = False):
        self.program = program
        self.max_steps = max_steps
        self.steps = 0
        self.truncated = False
        self.bindings: dict[Var, Term] = {}
        self.trail: list[Var] = []
        self.fresh = itertools.count()
        self.record = record
        self.calls: list[tuple[PredId, tuple[Var, ...], tuple[Term, ...], int]] = []
        self.exits: list[tuple[int, tuple[Term, ...]]] = []

    # -- store ---------------------------------------------------------------
    def walk(self, t: Term) -> Term:
        while isinstance(t, Var) and t in self.bindings:
            t = self.bindings[t]
        return t

    def resolve(self, t: Term) -> Term:
        t = self.walk(t)
        if isinstance(t, Struct) and t.args:
            return Struct(t.functor, tuple(self.resolve(a) for a in t.args))
        return t

    def _occurs(self, v: Var, t: Term) -> bool:
        stack = [t]
        while stack:
            x = self.walk(stack.pop())
            if x == v:
                return True
            if isinstance(x, Struct):
                stack.extend(x.args)
        return False

    def bind(self, v: Var, t: Term) -> None:
        self.bindings[v] = t
        self.trail.append(v)

    def unify(self, a: Term, b: Term) -> bool:
        stack = [(a, b)]
        while stack:
            x, y = stack.pop()
            x, y = self.walk(x), self.walk(y)
            if x == y:
                continue
            if isinstance(x, Var):
                if self._occurs(x, y):
                    return False
                self.bind(x, y)
            elif isinstance(y, Var):
                if self._occurs(y, x):
                    return False
                self.bind(y, x)
            elif isinstance(x, Struct) and isinstance(y, Struct):
                if x.functor != y.functor or len(x.args) != len(y.args):
                    return False
                stack.extend(zip(x.args, y.args))
            else:
                return False
        return True

    def undo(self, mark: int) -> None:
        while len(self.trail) > mark:
            del self.bindings[self.trail.pop()]

    def rename(self, c: Clause) -> tuple[Struct, list[Term]]:
        mapping: dict[Var, Term] = {}
        for t in c.terms():
            for v in iter_vars(t):
                if v not in mapping:
                    mapping[v] = Var(f"_G{next(self.fresh)}")
        return substitute(c.head, mapping), [substitute(b, mapping) for b in c.body]

    # -- search --------------------------------------------------------------
    def solutions(self, goals) -> Iterator[None]:
        """Iterate over solutions of a goal chain ``(goal, depth, rest)``.

        Bindings are live while a solution is being consumed.
        """
        choices: list = []
        current = goals
        while True:
            if current is None:
                yield None
                current = self._backtrack(choices)
                if current is _FAIL:
                    return
                continue
            goal, depth, rest = current
            ok, current = self._step(goal, depth, rest, choices)
            if not ok:
                current = self._backtrack(choices)
                if current is _FAIL:
                    return

    def _backtrack(self, choices):
        while choices:
            cp = choices.pop()
            self.undo(cp[1])
            if cp[0] == "alt":
                return cp[2]
            _, mark, goal, depth, rest, clauses, i, index = cp
            nxt = self._try_clauses(goal, depth, rest, clauses, i, index, choices)
            if nxt is not _FAIL:
                return nxt
        return _FAIL

    def _try_clauses(self, goal, depth, rest, clauses, i, index, choices):
        while i < len(clauses):
            if self.steps > self.max_steps:
                self.truncated = True
                return _FAIL
            mark = len(self.trail)
            head, body = self.rename(clauses[i])
            i += 1
            if self.unify(head, goal):
                if i < len(clauses):
                    choices.append(("clauses", mark, goal, depth, rest, clauses, i, index))
                tail = (_Exit(index), depth, rest) if self.record else rest
                for b in reversed(body):
                    tail = (b, depth + 1, tail)
                return tail
            self.undo(mark)
        return _FAIL

    def _step(self, goal, depth, rest, choices):
        if isinstance(goal, _Exit):
            call = self.calls[goal.index]
            self.exits.append((goal.index, tuple(self.resolve(a) for a in call[2])))
            return True, rest
        goal = self.walk(goal)
        if isinstance(goal, Var):
            raise InstantiationError("call of an unbound variable")
        f, n = goal.functor, len(goal.args)
        if f == "," and n == 2:
            return True, (goal.args[0], depth, (goal.args[1], depth, rest))
        if f == ";" and n == 2:
            choices.append(("alt", len(self.trail), (goal.args[1], depth, rest)))
            return True, (goal.args[0], depth, rest)
        if (f, n) not in self.program.preds:
            builtin = _BUILTINS.get((f, n))
            if builtin is not None:
                self.steps += 1
                if self.steps > self.max_steps:
                    self.truncated = True
                    return False, None
                out = builtin(self, goal.args)
                if out is False:
                    return False, None
                if out is True:
                    return True, rest
                # a goal to run in place of the builtin
                return True, (out, depth, rest)
            raise UnknownPredicate(str(f), n)
        clauses = self.program.preds[(f, n)]
        self.steps += 1
        if self.steps > self.max_steps:
            self.truncated = True
            return False, None
        index = -1
        if self.record:
            index = len(self.calls)
            self.calls.append((self.program.pred_id((f, n)), base_vars(n),
                               tuple(self.resolve(a) for a in goal.args), depth))
        nxt = self._try_clauses(goal, depth, rest, clauses, 0, index, choices)
        if nxt is _FAIL:
            return False, None
        return True, nxt


_FAIL = object()


# -- builtins ------------------------------------------------------------------


def _is_frozen(t: Term) -> bool:
    return isinstance(t, Struct) and t.functor == _FROZEN


def _b_unify(m: Machine, args):
    return m.unify(args[0], args[1])


def _b_true(m, args):
    return True


def _b_fail(m, args):
    return False


def _test(pred):
    def run(m: Machine, args):
        return bool(pred(m, m.resolve(args[0])))
    return run


def _ground(t: Term) -> bool:
    return next(iter_vars(t), None) is None and not _contains_frozen(t)


def _contains_frozen(t: Term) -> bool:
    if _is_frozen(t):
        return True
    return isinstance(t, Struct) and any(_contains_frozen(a) for a in t.args)


def _b_functor(m: Machine, args):
    t = m.walk(args[0])
    if _is_frozen(t):
        return False
    if isinstance(t, Struct):
        return m.unify(args[1], Struct(t.functor)) and m.unify(args[2], Struct(len(t.args)))
    name, ar = m.walk(args[1]), m.walk(args[2])
    if isinstance(name, Var) or isinstance(ar, Var):
        raise InstantiationError("functor/3: insufficiently instantiated")
    if not is_int(ar) or ar.functor < 0 or name.args or _is_frozen(name):
        return False
    fresh = tuple(Var(f"_G{next(m.fresh)}") for _ in range(ar.functor))
    return m.unify(t, Struct(name.functor, fresh) if fresh else name)


def _b_succ(m: Machine, args):
    a, b = m.walk(args[0]), m.walk(args[1])
    if is_int(a) and a.functor >= 0:
        return m.unify(b, Struct(a.functor + 1))
    if is_int(b):
        return b.functor > 0 and m.unify(a, Struct(b.functor - 1))
    # both unbound, or not integers: no solution
    return False


def _b_list2(m: Machine, args):
    """list(L, T): L is a list whose elements all satisfy property T."""
    lst, prop = args
    p = m.walk(prop)
    if not isinstance(p, Struct) or isinstance(p.functor, int) or _is_frozen(p):
        raise InstantiationError("list/2: property must be callable")
    h, tl = Var(f"_G{next(m.fresh)}"), Var(f"_G{next(m.fresh)}")
    empty = Struct("=", (lst, NIL))
    step = Struct(",", (Struct("=", (lst, Struct(".", (h, tl)))),
                        Struct(",", (Struct(p.functor, (*p.args, h)), Struct("list", (tl, p))))))
    return Struct(";", (empty, step))


_BUILTINS = {
    ("=", 2): _b_unify,
    ("true", 0): _b_true,
    ("fail", 0): _b_fail,
    ("functor", 3): _b_functor,
    ("succ", 2): _b_succ,
    ("list", 2): _b_list2,
    ("var", 1): _test(lambda m, t: isinstance(t, Var) or _is_frozen(t)),
    ("nonvar", 1): _test(lambda m, t: isinstance(t, Struct) and not _is_frozen(t)),
    ("ground", 1): _test(lambda m, t: _ground(t)),
    ("int", 1): _test(lambda m, t: is_int(t)),
    ("num", 1): _test(lambda m, t: is_int(t)),
    ("atm", 1): _test(lambda m, t: isinstance(t, Struct) and not t.args and isinstance(t.functor, str)),
    ("atomic", 1): _test(lambda m, t: isinstance(t, Struct) and not t.args),
    ("term", 1): _test(lambda m, t: True),
}


def _goal_list(goal) -> list[Term]:
    if isinstance(goal, (Struct, Var)):
        return conj_to_list(goal)
    out = []
    for g in goal:
        out.extend(conj_to_list(g))
    return out


def _chain(goals: Sequence[Term], tail=None):
    for g in reversed(goals):
        tail = (g, 0, tail)
    return tail


def _as_program(program) -> Program:
    if isinstance(program, Program):
        return program
    if isinstance(program, Module):
        return Program([program])
    return Program(list(program))


def solve(program, goal, depth_bound: int = DEFAULT_STEPS, limit: Optional[int] = None) -> SolveResult:
    """All answers (up to variants) of ``goal`` within ``depth_bound`` resolution steps."""
    prog = _as_program(program)
    goals = _goal_list(goal)
    gvars: list[Var] = []
    for g in goals:
        for v in term_vars(g):
            if v not in gvars:
                gvars.append(v)
    m = Machine(prog, depth_bound)
    answers, keys = [], set()
    limit_hit = False
    for _ in m.solutions(_chain(goals)):
        ans = {v: m.resolve(v) for v in gvars}
        k = canonical_key(tuple(ans.values()))
        if k not in keys:
            keys.add(k)
            answers.append(ans)
        if limit is not None and len(answers) >= limit:
            limit_hit = True
            break
    return SolveResult(answers, not (m.truncated or limit_hit))


def collect_pairs(program, entry_goal, depth_bound: int = DEFAULT_STEPS) -> list[CallSuccessPair]:
    """Every call event during bounded resolution of ``entry_goal``, paired with its successes."""
    prog = _as_program(program)
    m = Machine(prog, depth_bound, record=True)
    for _ in m.solutions(_chain(_goal_list(entry_goal))):
        pass
    succeeded = set()
    pairs = []
    for index, succ in m.exits:
        pid, bases, call, depth = m.calls[index]
        succeeded.add(index)
        pairs.append(CallSuccessPair(pid, dict(zip(bases, call)), dict(zip(bases, succ)), depth))
    for index, (pid, bases, call, depth) in enumerate(m.calls):
        if index not in succeeded:
            pairs.append(CallSuccessPair(pid, dict(zip(bases, call)), None, depth))
    return pairs


def in_trivial_success(literals, defs, theta: Mapping[Var, Term],
                       depth_bound: int = DEFAULT_STEPS) -> Optional[bool]:
    """Three-valued membership of ``theta`` in the trivial success set of ``literals``.

    True when some answer of ``literals`` under ``theta`` is a variant of ``theta``
    on the literal variables; None when the step bound makes the search inconclusive.
    The variables of ``theta``'s image are frozen into distinct constants: an answer that
    binds none of them is exactly a variant answer.
    """
    lits = _goal_list(literals) if not isinstance(literals, (list, tuple)) else list(literals)
    lvars: list[Var] = []
    for lit in lits:
        for v in term_vars(lit):
            if v not in lvars:
                lvars.append(v)
    inst = [substitute(lit, dict(theta)) for lit in lits]
    frozen: dict[Var, Term] = {}
    for lit in inst:
        for v in term_vars(lit):
            frozen.setdefault(v, Struct(_FROZEN, (Struct(len(frozen)),)))
    goals = [substitute(lit, frozen) for lit in inst]
    prog = _as_program(defs)
    m = Machine(prog, depth_bound)
    for _ in m.solutions(_chain(goals)):
        return True
    return None if m.truncated else False


# -- variants / matching -----------------------------------------------------


def match(pattern: Term, t: Term, s: Optional[dict] = None) -> Optional[dict]:
    """One-way matching: a substitution σ with patternσ == t, or None."""
    s = {} if s is None else s
    stack = [(pattern, t)]
    while stack:
        p, x = stack.pop()
        if isinstance(p, Var):
            if p in s:
                if s[p] != x:
                    return None
            else:
                s[p] = x
        elif isinstance(p, Struct) and isinstance(x, Struct):
            if p.functor != x.functor or len(p.args) != len(x.args):
                return None
            stack.extend(zip(p.args, x.args))
        elif p != x:
            return None
    return s


def is_variant(a: Term, b: Term) -> bool:
    """Two-way matching: each term is an instance of the other."""
    return match(a, b) is not None and match(b, a) is not None


def canonical_key(t) -> tuple:
    """A hashable key identical for variant terms."""
    names: dict[Var, int] = {}

    def go(x):
        if isinstance(x, Var):
            if x not in names:
                names[x] = len(names)
            return ("$v", names[x])
        if isinstance(x, tuple):
            return tuple(go(y) for y in x)
        if isinstance(x, Struct):
            return (x.functor, tuple(go(a) for a in x.args))
        return ("$s", str(x))

    return go(t)

