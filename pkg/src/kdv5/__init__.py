"""Equivalence transformations, invariants and exact solutions of variable-coefficient fifth-order KdV equations."""

__version__ = "0.1.0"
