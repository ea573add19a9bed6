"""Quantum-signal-processing arithmetic on a classical simulator."""

__version__ = "0.1.0"
