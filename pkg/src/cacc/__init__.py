"""One-way communication complexity of one-dimensional cellular automata."""

__version__ = "0.1.0"
