"""Simulation toolkit for encrypted cloning of qubit states."""

__version__ = "0.1.0"
