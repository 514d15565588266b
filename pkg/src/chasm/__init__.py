"""Depth reduction for arithmetic circuits and tensor-rank certificates."""

__version__ = "0.1.0"
