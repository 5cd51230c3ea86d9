"""Exact loop and percolation-cluster densities on tilted cylinders."""

__version__ = "0.1.0"
