"""Numerical laboratory for strong area-law states on small cubic lattices."""

__version__ = "0.1.0"
