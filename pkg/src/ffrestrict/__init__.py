"""Desk-scale laboratory for finite-field Fourier restriction on the paraboloid."""

__version__ = "0.1.0"
