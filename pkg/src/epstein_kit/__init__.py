"""Numerical toolkit for conformal metrics, Schwarzian tensors and Epstein surfaces."""

__version__ = "0.1.0"
