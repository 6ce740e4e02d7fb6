"""Multipath data protection with network coding over GF(2^m)."""

__version__ = "0.1.0"
