"""Champagne subregions: construction, walk-on-spheres simulation and verification."""

__version__ = "0.1.0"
