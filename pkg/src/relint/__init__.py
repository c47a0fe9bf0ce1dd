"""Relative interleavings of modules over finite posets."""
from __future__ import annotations

from .diagrams import Module, ModuleMap, SearchCapExceeded, SetModule, VectModule, colimit, limit
from .fflinalg import FFMatrix
from .interleave import distance, standard_exists, weak_exists
from .kan import pullback, pushforward, pushforward_open
from .poset import DownLattice, FinitePoset, MonotoneMap, build_poset
from .translate import IntrinsicShift, RelativeShift, TranslationFamily, WeightedPoset

__all__ = [
    "DownLattice", "FFMatrix", "FinitePoset", "IntrinsicShift", "Module", "ModuleMap", "MonotoneMap",
    "RelativeShift", "SearchCapExceeded", "SetModule", "TranslationFamily", "VectModule", "WeightedPoset",
    "build_poset", "colimit", "distance", "limit", "pullback", "pushforward", "pushforward_open",
    "standard_exists", "weak_exists",
]
__version__ = "0.1.0"
