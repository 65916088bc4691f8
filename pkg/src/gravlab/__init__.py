"""Simulators and calculators for competing low-energy models of gravity."""
from ._kernels import BACKEND as KERNEL_BACKEND
from .quantities import CONSTANTS, PhysicalConstants

__version__ = "0.1.0"
__all__ = ["CONSTANTS", "PhysicalConstants", "KERNEL_BACKEND", "__version__"]
