"""Redundant task assignment, worst-case distortion analysis and a
Byzantine-robust synchronous SGD simulator."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .assignment import (
    AssignmentGraph,
    ClusterConfig,
    Scheme,
    build_assignment,
    build_baseline_assignment,
    build_frc_assignment,
    build_mols_assignment,
    build_ramanujan_assignment,
)
from .combinatorics import build_mols, check_orthogonal, make_prime_field
from .distortion import (
    count_distorted,
    epsilon_frc,
    exact_small_q,
    max_distortion_exhaustive,
    max_distortion_heuristic,
)
from .spectral import check_tanner_expansion, compute_bounds, compute_spectrum

__all__ = [
    "BACKEND",
    "AssignmentGraph",
    "ClusterConfig",
    "Scheme",
    "build_assignment",
    "build_baseline_assignment",
    "build_frc_assignment",
    "build_mols_assignment",
    "build_ramanujan_assignment",
    "build_mols",
    "check_orthogonal",
    "make_prime_field",
    "count_distorted",
    "epsilon_frc",
    "exact_small_q",
    "max_distortion_exhaustive",
    "max_distortion_heuristic",
    "check_tanner_expansion",
    "compute_bounds",
    "compute_spectrum",
]
