"""Spectra, canonical products and n-entire classification for singular radial Schrodinger operators on (0, 1)."""

__version__ = "0.1.0"
