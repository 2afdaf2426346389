"""Hypothesis strategies and independent membership oracles shared by the test suites."""

from __future__ import annotations

from hypothesis import strategies as st

from semsearch.domains.shapes import Shapes
from semsearch.domains.shfr import ShFr
from semsearch.domains.types import BOT, TERM, TypeTable
from semsearch.terms import Str, Struct, Var, format_term, term_vars

# the 5-symbol signature: two constants, an integer, a unary and a binary functor
SIGNATURE = (("a", 0), ("b", 0), (0, 0), ("f", 1), ("g", 2))
VARS = (Var("X"), Var("Y"), Var("Z"))
RANGE_VARS = (Var("U"), Var("V"), Var("W"))


def terms(depth: int = 2, vars=RANGE_VARS):
    leaf = st.sampled_from([Struct(f) for f, n in SIGNATURE if n == 0] + list(vars))
    if depth == 0:
        return leaf

    def node(sub):
        return st.one_of(
            st.builds(lambda a: Struct("f", (a,)), sub),
            st.builds(lambda a, b: Struct("g", (a, b)), sub, sub),
        )

    return st.recursive(leaf, node, max_leaves=2 ** depth).filter(lambda t: _depth(t) <= depth)


def _depth(t) -> int:
    if isinstance(t, Struct) and t.args:
        return 1 + max(_depth(a) for a in t.args)
    return 0


@st.composite
def substitutions(draw, vars=VARS, depth: int = 2):
    """A substitution over ``vars`` whose range uses ``RANGE_VARS``."""
    return {v: draw(terms(depth)) for v in vars}


# -- ShFr -------------------------------------------------------------------------------

shfr = ShFr()


@st.composite
def shfr_elements(draw, vars=VARS):
    subsets = [frozenset(v for i, v in enumerate(vars) if mask >> i & 1) for mask in range(1, 2 ** len(vars))]
    if draw(st.integers(0, 15)) == 0:
        return shfr.bottom(vars)
    sharing = draw(st.sets(st.sampled_from(subsets)))
    covered = sorted(frozenset().union(*sharing) if sharing else (), key=vars.index)
    free = draw(st.sets(st.sampled_from(covered))) if covered else set()
    return shfr.element(vars, sharing, free)


def shfr_member(a, theta) -> bool:
    """Membership by definition: sharing groups of ``theta`` in ``a``; free vars bound to vars."""
    if a.is_bottom:
        return False
    sharing, free = a.payload
    occ = {}
    for v in a.vars:
        for u in term_vars(theta.get(v, v)):
            occ.setdefault(u, set()).add(v)
    groups = {frozenset(s) for s in occ.values()}
    if not groups <= set(sharing):
        return False
    return all(isinstance(theta.get(v, v), Var) for v in free)


# -- Shapes -----------------------------------------------------------------------------


@st.composite
def type_exprs(draw, table: TypeTable, depth: int = 2):
    """A type name built in ``table`` from builtins and the signature by lub, glb and lists."""
    base = ["term", "int", "num", "atm", "atomic", "list"] + [table.atom_type(f) for f, n in SIGNATURE if n == 0]
    if depth == 0:
        return draw(st.sampled_from(base))
    op = draw(st.sampled_from(["base", "f", "g", "lub", "glb", "list"]))
    sub = type_exprs(table, depth - 1)
    if op == "base":
        return draw(st.sampled_from(base))
    if op == "f":
        return table.struct_type("f", [draw(sub)])
    if op == "g":
        return table.struct_type("g", [draw(sub), draw(sub)])
    if op == "list":
        return table.list_of(draw(sub))
    a, b = draw(sub), draw(sub)
    return table.lub(a, b) if op == "lub" else table.glb(a, b)


@st.composite
def shapes_elements(draw, dom: Shapes, vars=VARS):
    if draw(st.integers(0, 15)) == 0:
        return dom.bottom(vars)
    return dom.element(vars, {v: draw(type_exprs(dom.table)) for v in vars})


def type_member(table: TypeTable, name: str, t) -> bool:
    """Is every instance of ``t`` in type ``name``?  Variables are only in ``term``."""
    if name == TERM:
        return True
    if name == BOT or isinstance(t, (Var, Str)):
        return False
    d = table.get(name)
    if not t.args:
        if isinstance(t.functor, int):
            return bool(d.leaves & {"int", "num"})
        if "atm" in d.leaves:
            return True
    args = d.case_map.get((t.functor, len(t.args)))
    return args is not None and all(type_member(table, a, x) for a, x in zip(args, t.args))


def shapes_member(dom: Shapes, a, theta) -> bool:
    if a.is_bottom:
        return False
    return all(type_member(dom.table, ty, theta.get(v, v)) for v, ty in zip(a.vars, a.payload))


# -- random programs ----------------------------------------------------------------------

PRED_NAMES = (("p", 1), ("q", 2), ("r", 2))
ENTRY_PROPS = ("var", "ground", "atm", "nonvar")


@st.composite
def programs(draw, max_clauses: int = 6, entries: bool = False):
    """Source text of a small module over the signature; every called predicate is defined.

    With ``entries`` some predicates get a ``pred`` assertion whose calls part sets the entry.
    """
    n = draw(st.integers(1, max_clauses))
    heads = [draw(st.sampled_from(PRED_NAMES)) for _ in range(n)]
    defined = sorted(set(heads), key=PRED_NAMES.index)
    cvars = (Var("A"), Var("B"), Var("C"))
    lines = []
    for name, arity in heads:
        args = [draw(terms(1, cvars)) for _ in range(arity)]
        body = []
        for _ in range(draw(st.integers(0, 2))):
            kind = draw(st.sampled_from(["call", "call", "eq", "test"]))
            if kind == "call":
                cn, ca = draw(st.sampled_from(defined))
                body.append(Struct(cn, tuple(draw(terms(1, cvars)) for _ in range(ca))))
            elif kind == "eq":
                body.append(Struct("=", (draw(st.sampled_from(cvars)), draw(terms(1, cvars)))))
            else:
                body.append(Struct(draw(st.sampled_from(["var", "nonvar", "ground", "atm"])),
                                   (draw(st.sampled_from(cvars)),)))
        lines.append((Struct(name, tuple(args)), body))
    exports = ", ".join(f"{nm}/{ar}" for nm, ar in defined)
    text = [f":- module(rand, [{exports}])."]
    if entries:
        for nm, ar in defined:
            if draw(st.booleans()):
                vs = [v.name for v in cvars[:ar]]
                lits = [f"{draw(st.sampled_from(ENTRY_PROPS))}({draw(st.sampled_from(vs))})"
                        for _ in range(draw(st.integers(1, 2)))]
                text.append(f":- pred {nm}({','.join(vs)}) : ({', '.join(lits)}).")
    for head, body in lines:
        h = format_term(head)
        text.append(h + (" :- " + ", ".join(format_term(b, prec=999) for b in body) if body else "") + ".")
    return "\n".join(text) + "\n"


def unify_compose(theta, x, t):
    """``theta`` composed with an mgu of ``theta(x)`` and ``theta(t)``; None if they do not unify."""
    from semsearch.concrete import solve
    from semsearch.terms import substitute

    lhs, rhs = substitute(x, theta), substitute(t, theta)
    res = solve([], Struct("=", (lhs, rhs)))
    if not res.answers:
        return None
    ans = res.answers[0]
    return {v: substitute(theta.get(v, v), ans) for v in theta}


def entry_goals(module, pred, args_list):
    """The goals among candidate argument tuples that some entry of ``pred`` admits."""
    from semsearch.concrete import Program, in_trivial_success

    asserts = module.assertions_for(pred.key)
    out = []
    for args in args_list:
        goal = Struct(pred.name, tuple(args))
        if not asserts:
            out.append(goal)
            continue
        for a in asserts:
            theta = dict(zip(a.args, args))
            if any(in_trivial_success(list(conj), Program(), theta) for conj in a.pre):
                out.append(goal)
                break
    return out
