"""Exact algebraic certification of distributions of noncommutative polynomials in free variables."""

__version__ = "0.1.0"
