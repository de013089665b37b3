"""Rough evolution equations on a spectral semigroup testbed."""

__version__ = "0.1.0"
