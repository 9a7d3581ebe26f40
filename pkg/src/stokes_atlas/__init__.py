"""Stokes data of generalized hypergeometric equations and their rank-1 GKZ lifts."""

__version__ = "0.1.0"
