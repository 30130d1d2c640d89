"""Entanglement of shielded, delocalized test masses: Gaussian, cat and Fock engines."""

from ._kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
