"""Numerical laboratory for directional maximal averages in the plane."""

__version__ = "0.1.0"
