"""Solver for spatial rational expectations equilibria of a Ramsey
growth economy with kernel-mediated externalities."""

__version__ = "0.1.0"
