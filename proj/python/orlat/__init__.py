"""Weighted contact process on the oriented lattice (C++ core)."""

from ._orlat import *  # noqa: F401,F403
from ._orlat import OrlatError, WeightSpec

__all__ = ["OrlatError", "WeightSpec"]
__version__ = "0.1.0"
