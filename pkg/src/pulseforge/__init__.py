"""Pulse-level ansatz simulation and profiling."""

__version__ = "0.1.0"
