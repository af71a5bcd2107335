"""Sumsets and solution counts for strictly convex sequences."""

from .energy import (
    EnergyReport,
    ExponentFit,
    energy_bruteforce,
    energy_dirichlet,
    energy_from_weights,
    fit_exponent,
)
from .errors import ConvexEnergyError, DomainError, InvariantError, ResourceError, ValidationError
from .sequences import ConvexSequence, SequenceKind, check_strict_convexity, gen_sequence, parse_kind
from .sumset import WeightedSumset, build_weighted_sumset

__all__ = [
    "ConvexEnergyError",
    "ConvexSequence",
    "DomainError",
    "EnergyReport",
    "ExponentFit",
    "InvariantError",
    "ResourceError",
    "SequenceKind",
    "ValidationError",
    "WeightedSumset",
    "build_weighted_sumset",
    "check_strict_convexity",
    "energy_bruteforce",
    "energy_dirichlet",
    "energy_from_weights",
    "fit_exponent",
    "gen_sequence",
    "parse_kind",
]
