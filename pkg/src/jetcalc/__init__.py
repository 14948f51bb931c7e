"""Coordinate calculus on composite fibred manifolds Y -> Sigma -> X."""
__version__ = "0.1.0"
