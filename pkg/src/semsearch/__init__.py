"""Semantic search of logic-program predicates by assertion queries."""

__version__ = "0.1.0"
