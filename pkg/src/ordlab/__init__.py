"""Numerical experiments on the order scale of the Wiener measure."""
__version__ = "0.1.0"
