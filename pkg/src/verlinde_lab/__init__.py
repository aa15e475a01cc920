"""Exact and numeric checks of equivariant Verlinde-type indices on GL2 Higgs moduli."""
__version__ = "0.1.0"
