"""Reduced-instruction-set quantum simulation of ion traps and optical lattices."""

from .kernels import BACKEND

__all__ = ["BACKEND", "hilbert", "iontrap", "dicke", "lattice", "squeeze", "cli"]
