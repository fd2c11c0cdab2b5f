"""Layer-selective parameter transfer for QAOA on Max-Cut, simulated exactly on statevectors."""

__version__ = "0.1.0"
