"""Finite-truncation optimal control of experiential utility and its verification harness."""

__version__ = "0.1.0"
