"""Spectrum of the normalized biadjacency matrix and the expansion-based bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Tuple

import numpy as np

from .assignment import AssignmentGraph
from .errors import InvalidParams, NotBiregular

TOL = 1e-9


@dataclass(frozen=True)
class SpectralReport:
    eigenvalues: Tuple[Tuple[float, int], ...]
    mu1: float
    sigma2: float
    is_ramanujan: bool
    d_left: int
    d_right: int

    def flat(self) -> np.ndarray:
        """Eigenvalues with multiplicity, descending."""
        return np.array([v for v, m in self.eigenvalues for _ in range(m)])

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [[v, m] for v, m in self.eigenvalues],
            "mu1": self.mu1,
            "sigma2": self.sigma2,
            "is_ramanujan": self.is_ramanujan,
        }


@dataclass(frozen=True)
class BoundReport:
    q: int
    beta: float
    gamma: float


def group_multiplicities(values: Iterable[float], tol: float = TOL) -> List[Tuple[float, int]]:
    """Collapse a descending sequence into ``(value, multiplicity)`` pairs.

    Consecutive values within ``tol`` of the first member of their run share a group;
    each group is reported by its mean.
    """
    groups: List[List[float]] = []
    for v in values:
        if groups and abs(groups[-1][0] - v) <= tol:
            groups[-1].append(v)
        else:
            groups.append([v])
    return [(float(np.mean(g)), len(g)) for g in groups]


def normalized_gram(graph: AssignmentGraph) -> np.ndarray:
    H = graph.biadjacency.astype(float)
    return (H @ H.T) / (graph.l * graph.r)


def _check_biregular(graph: AssignmentGraph):
    H = graph.biadjacency
    if len(set(H.sum(axis=1).tolist())) != 1 or len(set(H.sum(axis=0).tolist())) != 1:
        raise NotBiregular("biadjacency matrix is not biregular")


def compute_spectrum(graph: AssignmentGraph) -> SpectralReport:
    _check_biregular(graph)
    evals = np.linalg.eigvalsh(normalized_gram(graph))[::-1]
    # clamp round-off at the ends of [0, 1]
    evals = np.where(np.abs(evals) < TOL, 0.0, evals)
    evals = np.where(np.abs(evals - 1.0) < TOL, 1.0, evals)
    grouped = group_multiplicities(evals)
    mu1 = float(evals[1]) if len(evals) > 1 else 0.0
    sv = np.linalg.svd(graph.biadjacency.astype(float), compute_uv=False)
    sigma2 = float(sv[1]) if len(sv) > 1 else 0.0
    dl, dr = graph.l, graph.r
    ramanujan = sigma2 <= math.sqrt(dl - 1) + math.sqrt(dr - 1) + TOL
    return SpectralReport(tuple(grouped), mu1, sigma2, ramanujan, dl, dr)


def expansion_bound(q: int, l: int, r: int, K: int, mu1: float) -> float:
    """Lower bound on the number of files touched by any ``q`` workers."""
    return (q * l / r) / (mu1 + (1.0 - mu1) * q / K)


def distortion_bound(q: int, l: int, r: int, K: int, mu1: float) -> float:
    """Upper bound on the files ``q`` colluding workers can distort (unclipped)."""
    if q == 0:
        return 0.0
    if r == 1:
        return math.inf
    beta = expansion_bound(q, l, r, K, mu1)
    return (q * l - beta) / ((r - 1) / 2)


def compute_bounds(graph: AssignmentGraph, q: int, spectrum: SpectralReport = None) -> BoundReport:
    if not 0 <= q <= graph.K:
        raise InvalidParams(f"need 0 <= q <= K, got q={q}")
    mu1 = (spectrum or compute_spectrum(graph)).mu1
    K, l, r = graph.K, graph.l, graph.r
    beta = expansion_bound(q, l, r, K, mu1) if q else 0.0
    return BoundReport(q, beta, distortion_bound(q, l, r, K, mu1))


def check_tanner_expansion(graph: AssignmentGraph, subset, mu1: float = None) -> bool:
    """Check the volume-expansion inequality for a set of workers."""
    S = set(int(j) for j in subset)
    if not S:
        raise InvalidParams("subset must be nonempty")
    if mu1 is None:
        mu1 = compute_spectrum(graph).mu1
    vol_s = len(S) * graph.l
    neighbours = set()
    for j in S:
        neighbours.update(graph.worker_files[j])
    vol_n = len(neighbours) * graph.r
    rhs = 1.0 / (mu1 + (1.0 - mu1) * vol_s / graph.n_edges)
    return vol_n / vol_s >= rhs - TOL


def lemma_spectrum(graph: AssignmentGraph) -> List[Tuple[float, int]]:
    """Closed-form spectrum for MOLS and array-code graphs."""
    from .assignment import Scheme

    l, r = graph.l, graph.r
    if graph.scheme in (Scheme.MOLS, Scheme.RAMANUJAN_1):
        return [(1.0, 1), (1.0 / r, r * (l - 1)), (0.0, r - 1)]
    if graph.scheme is Scheme.RAMANUJAN_2:
        return [(1.0, 1), (1.0 / r, r * (r - 1)), (0.0, r - 1)]
    raise InvalidParams(f"no closed form for {graph.scheme.value}")
