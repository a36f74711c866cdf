"""Kernel-asymptotics laboratory for strictly pseudoconvex domains."""

__version__ = "0.1.0"
