"""Exact search toolkit for kernel elements of the reduced Burau
representation of the 3- and 4-strand braid groups."""

__version__ = "0.1.0"
