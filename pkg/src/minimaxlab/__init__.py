"""Minimax and local-optimality toolkit for smooth zero-sum games."""

from .linalg_core import DimensionMismatch, NonConvergence, NonFinite
from .quadratic_games import QuadraticGame, classify, mirror, stationary_set

__all__ = [
    "DimensionMismatch", "NonConvergence", "NonFinite",
    "QuadraticGame", "classify", "mirror", "stationary_set",
]
__version__ = "0.1.0"
