"""Discrete constant mean curvature nets from loop group dressing."""

__version__ = "0.1.0"
