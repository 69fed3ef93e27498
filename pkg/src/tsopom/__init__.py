"""Pomset semantics for a TSO shared-memory language."""

__version__ = "0.1.0"
