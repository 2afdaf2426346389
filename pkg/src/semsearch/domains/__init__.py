"""Abstract domains: set-sharing with freeness (``shfr``) and regular types (``shapes``)."""

from __future__ import annotations

from .base import AbstractSubst, Domain, DomainMismatch
from .shapes import Shapes
from .shfr import ShFr
from .types import TypeDef, TypeTable

DOMAIN_IDS = ("shfr", "shapes")


def make_domain(name: str, table: TypeTable | None = None) -> Domain:
    if name == "shfr":
        return ShFr()
    if name == "shapes":
        return Shapes(table if table is not None else TypeTable())
    raise ValueError(f"unknown domain {name!r}; expected one of {', '.join(DOMAIN_IDS)}")


__all__ = ["AbstractSubst", "Domain", "DomainMismatch", "Shapes", "ShFr", "TypeDef",
           "TypeTable", "DOMAIN_IDS", "make_domain"]
