"""Spacetime-harmonic band estimates on symmetric warped-product metrics."""

__version__ = "0.1.0"
