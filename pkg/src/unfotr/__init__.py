"""Finite satisfiability and finite-model building for the unary negation fragment with transitive relations."""

__version__ = "0.1.0"
