"""GBDT (generalized Backlund-Darboux) transformations of first-order spectral systems."""

__version__ = "0.1.0"
