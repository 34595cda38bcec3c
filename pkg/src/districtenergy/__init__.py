"""Compositional modeling, optimization and simulation of district energy networks."""

__version__ = "0.1.0"
