"""Biomolecular parsing, tokenization, fusion and evaluation toolkit."""

__version__ = "0.1.0"
