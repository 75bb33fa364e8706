"""Quantum Monty Hall discard protocol versus deterministic hidden-variable models."""

__version__ = "0.1.0"
