"""Generalized bilateral weighted shifts on l2(K(H)) and checkers for their dynamics."""

__version__ = "0.1.0"
