"""Workbench for supplementary balance laws of zero-order balance systems."""

__version__ = "0.1.0"
