"""Offline plots over the solver's CSV outputs; plots re-assert the
invariants they visualize."""

__version__ = "0.1.0"
