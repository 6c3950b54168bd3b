"""Resonance chains of 3-funneled hyperbolic surfaces via dynamical zeta functions."""

__version__ = "0.1.0"
