"""bosesep: separability of permutation-symmetric (identical-boson) states."""

from ._kernels import BACKEND
from .linalg import SystemShape

__version__ = "0.1.0"

__all__ = ["BACKEND", "SystemShape", "__version__"]
