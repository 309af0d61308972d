"""Numerical laboratory for near-parabolic quadratic dynamics.

Modules:
  cf      nearest-integer continued fractions, Brjuno sums, product sequences
  maps    the quadratic and cubic model maps, orbits, the exponential projection
  fatou   lifted maps, perturbed Fatou coordinates and their checks
  renorm  near-parabolic renormalization, tower bookkeeping, critical-orbit gates
  render  escape-time and critical-orbit images
  verify  the configurable verification suite
"""
__version__ = "0.1.0"

from .errors import FatouLabError  # noqa: E402

__all__ = ["FatouLabError", "__version__"]
