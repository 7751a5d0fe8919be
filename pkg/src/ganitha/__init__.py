"""Solve Sinhala addition/subtraction word problems."""
__version__ = "0.1.0"
