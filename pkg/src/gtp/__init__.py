"""Generalized quantum teleportation over non-maximally entangled channels."""

from gtp.core import Outcome, ParameterError
from gtp.multi import MultiParams

__all__ = ["MultiParams", "Outcome", "ParameterError"]
__version__ = "0.1.0"
