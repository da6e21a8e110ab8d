"""Symbolic search planners built on decision diagrams."""

__version__ = "0.1.0"
