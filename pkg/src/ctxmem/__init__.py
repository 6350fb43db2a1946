"""Verification and minimal-automaton search for the memory cost of Pauli contextuality."""

__version__ = "0.1.0"
