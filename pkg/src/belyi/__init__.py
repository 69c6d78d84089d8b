"""Enumeration of Belyi passports and tools for computing Belyi maps."""

__version__ = "0.1.0"
