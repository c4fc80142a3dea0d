"""Teleoperated driving stack: vehicle simulation, network emulation,
operator console and a reproducible scenario harness."""

__version__ = "0.1.0"
