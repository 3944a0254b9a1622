"""Numerical laboratory for bid-ask markets with proportional transaction costs."""

__version__ = "0.1.0"
