"""Singularity-free inverse dynamics for a rolling carrier driven by a wave-guided rotor."""

__version__ = "0.1.0"
