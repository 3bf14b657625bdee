"""Numerical invariants of instanton sheaves on Picard-rank-one Fano threefolds."""

from .chow_core import ChowClass, FanoData, euler_char, euler_pair, load_registry, prime_fano, threefold
from .instanton_invariants import DeviationRecord, gamma, min_charge, minimal_character

__all__ = [
    "ChowClass",
    "DeviationRecord",
    "FanoData",
    "euler_char",
    "euler_pair",
    "gamma",
    "load_registry",
    "min_charge",
    "minimal_character",
    "prime_fano",
    "threefold",
]
