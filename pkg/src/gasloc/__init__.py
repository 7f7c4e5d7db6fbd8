"""gasloc: ground-air-space radio localization simulation toolkit."""

from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
