"""Nodal domain counts of Schrödinger eigenvectors on discrete and metric graphs."""

__version__ = "0.1.0"
