"""Modulation-enhanced magnetometry with a cavity-magnon system."""

__version__ = "0.1.0"
