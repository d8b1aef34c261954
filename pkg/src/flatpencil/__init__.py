"""Exact flat-pencil construction of Frobenius structures on dicyclic orbit spaces."""

__version__ = "0.1.0"
