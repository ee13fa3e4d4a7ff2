"""Reductions around Orthogonal Vectors: protocol compilation, LSH sketches,
encoding gadgets, polynomial-method gap deciders and a MAXSAT approximation."""

__version__ = "0.1.0"
