"""Variability-aware ML model selection with bias auditing."""

__version__ = "0.1.0"
