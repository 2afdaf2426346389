"""Abstract substitutions and the contract every abstract domain implements."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Optional, Sequence

from ..terms import Term, Var


class DomainMismatch(Exception):
    """Operands belong to different domains or variable sets."""


@dataclass(frozen=True)
class AbstractSubst:
    """A domain-tagged description of a set of substitutions over ``vars``.

    ``payload is None`` is Bottom.
    """

    domain: str
    vars: tuple[Var, ...]
    payload: Any

    @property
    def is_bottom(self) -> bool:
        return self.payload is None


class Domain:
    """Lattice operations and transfer functions of one abstract domain."""

    name: str = ""

    # -- lattice -------------------------------------------------------------
    def top(self, vars: Sequence[Var]) -> AbstractSubst:
        raise NotImplementedError

    def bottom(self, vars: Sequence[Var]) -> AbstractSubst:
        return AbstractSubst(self.name, tuple(vars), None)

    def leq(self, a: AbstractSubst, b: AbstractSubst) -> bool:
        raise NotImplementedError

    def lub(self, a: AbstractSubst, b: AbstractSubst) -> AbstractSubst:
        raise NotImplementedError

    def glb(self, a: AbstractSubst, b: AbstractSubst) -> AbstractSubst:
        raise NotImplementedError

    def widen(self, a: AbstractSubst, b: AbstractSubst) -> AbstractSubst:
        return self.lub(a, b)

    def equal(self, a: AbstractSubst, b: AbstractSubst) -> bool:
        return self.leq(a, b) and self.leq(b, a)

    def is_top(self, a: AbstractSubst) -> bool:
        return self.leq(self.top(a.vars), a)

    # -- variable sets -------------------------------------------------------
    def project(self, a: AbstractSubst, vars: Sequence[Var]) -> AbstractSubst:
        raise NotImplementedError

    def extend_fresh(self, a: AbstractSubst, new: Sequence[Var]) -> AbstractSubst:
        """Add variables that are free and unaliased (fresh clause variables)."""
        raise NotImplementedError

    def extend_call(self, state: AbstractSubst, call_vars: Sequence[Var],
                    success: AbstractSubst) -> AbstractSubst:
        """Combine ``state`` with the success ``success`` of a call over ``call_vars``."""
        raise NotImplementedError

    def rename(self, a: AbstractSubst, mapping: Mapping[Var, Var]) -> AbstractSubst:
        raise NotImplementedError

    # -- transfer ------------------------------------------------------------
    def amgu(self, a: AbstractSubst, x: Var, t: Term) -> AbstractSubst:
        raise NotImplementedError

    def weaken(self, a: AbstractSubst) -> AbstractSubst:
        """A description of whatever an unknown call may do to ``a``'s variables."""
        return a

    # -- concrete side -------------------------------------------------------
    def alpha(self, theta: Mapping[Var, Term], vars: Sequence[Var]) -> AbstractSubst:
        """Best description of the single substitution ``theta`` restricted to ``vars``."""
        raise NotImplementedError

    def contains(self, a: AbstractSubst, theta: Mapping[Var, Term]) -> bool:
        """Is ``theta`` a member of the concretization of ``a``?"""
        if a.is_bottom:
            return False
        return self.leq(self.alpha(theta, a.vars), a)

    # -- rendering -----------------------------------------------------------
    def render(self, a: AbstractSubst, names: Optional[Mapping[Var, str]] = None,
               style: str = "pred") -> str:
        raise NotImplementedError

    # -- helpers -------------------------------------------------------------
    def check(self, a: AbstractSubst, b: AbstractSubst) -> None:
        if a.domain != self.name or b.domain != self.name:
            raise DomainMismatch(f"expected {self.name} elements, got {a.domain} and {b.domain}")
        if set(a.vars) != set(b.vars):
            raise DomainMismatch(
                f"variable sets differ: {[v.name for v in a.vars]} vs {[v.name for v in b.vars]}")


def ordered_union(*groups: Iterable[Var]) -> tuple[Var, ...]:
    seen: dict[Var, None] = {}
    for g in groups:
        for v in g:
            seen.setdefault(v, None)
    return tuple(seen)
