"""Spectrum-aware shortest path routing and simulation for elastic optical networks."""

__version__ = "0.1.0"
