"""Symbolic infrared analysis of soft-photon insertions on a charged triangle loop."""

__version__ = "0.1.0"
