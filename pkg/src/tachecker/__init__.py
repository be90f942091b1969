"""Parameterized safety checking for threshold automata."""
__version__ = "0.1.0"
