"""Sparse direct methods: storage, orderings, factorizations, scaling,
stability analysis and basis updates."""

__version__ = "0.1.0"
