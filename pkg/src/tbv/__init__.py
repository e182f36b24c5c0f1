"""Toeplitz sequences, their Bratteli-Vershik models and factor obstructions."""

__version__ = "0.1.0"

from ._kernels import BACKEND  # noqa: E402
from .words import Alphabet, PartialWord  # noqa: E402
from .toeplitz import SkeletonTower, constructive_structure, fill_prefix  # noqa: E402
from .substitution import Substitution, tower_from_substitution  # noqa: E402
from .bratteli import OrderedBratteliDiagram, bv_from_tower  # noqa: E402

__all__ = [
    "BACKEND",
    "Alphabet",
    "PartialWord",
    "SkeletonTower",
    "constructive_structure",
    "fill_prefix",
    "Substitution",
    "tower_from_substitution",
    "OrderedBratteliDiagram",
    "bv_from_tower",
]
