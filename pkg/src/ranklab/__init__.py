"""Sensitivity toolkit for weighted-score rankings."""

__version__ = "0.1.0"
