"""Approximation algorithms, exact oracles and generators for set multicover
on hypergraphs."""

__version__ = "0.1.0"

from .hypergraph import (
    CoverSolution,
    Hypergraph,
    InfeasibleInstanceError,
    InvalidHypergraphError,
    MatchingSolution,
    complement,
    degree_profile,
    is_k_matching,
    is_multicover,
    validate,
)
from .instance_io import read_instance, write_instance
from .lp import build_relaxation, solve_lp, solve_relaxation, verify_lp_optimality
from .matching import capacity_vector, duality_cover, greedy_k_matching
from .oracle import exact_max_k_matching, exact_min_multicover
from .rounding import RoundingParams, algorithm1_solve, monte_carlo_verify, threshold_cover

__all__ = [
    "CoverSolution",
    "Hypergraph",
    "InfeasibleInstanceError",
    "InvalidHypergraphError",
    "MatchingSolution",
    "RoundingParams",
    "algorithm1_solve",
    "build_relaxation",
    "capacity_vector",
    "complement",
    "degree_profile",
    "duality_cover",
    "exact_max_k_matching",
    "exact_min_multicover",
    "greedy_k_matching",
    "is_k_matching",
    "is_multicover",
    "monte_carlo_verify",
    "read_instance",
    "solve_lp",
    "solve_relaxation",
    "threshold_cover",
    "validate",
    "verify_lp_optimality",
    "write_instance",
]
