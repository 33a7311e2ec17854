"""Electroadhesion between a finger and a voltage-driven touchscreen."""

__version__ = "0.1.0"
