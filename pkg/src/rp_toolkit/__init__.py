"""Numerical toolkit for reflection-positivity bounds on lattice spin models."""

__version__ = "0.1.0"
