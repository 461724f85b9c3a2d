"""Entanglement between two non-interacting qubits via a never-entangled ancilla."""

__version__ = "0.1.0"
