"""Hilfer-Hadamard fractional boundary value problems: solver, certificates and CLI."""

__version__ = "0.1.0"
