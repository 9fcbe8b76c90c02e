"""Omniscient Byzantine behaviour: who attacks, and what they send.

Fabricated vectors depend only on the attack spec, the true gradient of
the file and per-iteration statistics, so all Byzantine copies of a file
agree and win the vote whenever they hold ``r'`` of its ``r`` copies.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .assignment import AssignmentGraph
from .distortion import DEFAULT_BUDGET, max_distortion_exhaustive
from .errors import InvalidParams, MissingStats


class AttackKind(str, enum.Enum):
    ALIE = "alie"
    CONSTANT = "constant"
    REVERSED = "reversed"


@dataclass(frozen=True)
class AttackSpec:
    kind: AttackKind = AttackKind.REVERSED
    byzantine_set: Tuple[int, ...] = ()
    constant_value: float = -100.0
    reverse_scale: float = 1.0
    alie_z: float = 1.0
    reselect_each_iter: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", AttackKind(self.kind))
        byz = tuple(sorted(set(int(j) for j in self.byzantine_set)))
        if len(byz) != len(self.byzantine_set):
            raise InvalidParams("byzantine_set has duplicates")
        object.__setattr__(self, "byzantine_set", byz)
        if self.kind is AttackKind.REVERSED and not self.reverse_scale > 0:
            raise InvalidParams(f"reversed attack needs c > 0, got {self.reverse_scale}")

    @property
    def q(self) -> int:
        return len(self.byzantine_set)

    def check_graph(self, graph: AssignmentGraph):
        if any(j >= graph.K or j < 0 for j in self.byzantine_set):
            raise InvalidParams(f"byzantine_set not within 0..{graph.K - 1}")


@dataclass(frozen=True)
class BatchStats:
    mean: np.ndarray
    std: np.ndarray


def batch_stats(vectors) -> BatchStats:
    X = np.asarray(vectors, dtype=float)
    return BatchStats(X.mean(axis=0), X.std(axis=0))


def choose_byzantines(
    graph: AssignmentGraph, q: int, budget: int = DEFAULT_BUDGET, threads: int = 1
) -> Tuple[int, ...]:
    """Worst-case coalition of size ``q`` (exhaustive when within budget)."""
    if not 0 <= q < graph.K:
        raise InvalidParams(f"need 0 <= q < K, got q={q}")
    if q == 0:
        return ()
    return max_distortion_exhaustive(graph, q, budget, threads).witness


def optimal_coalitions(graph: AssignmentGraph, q: int, c_max: int, limit: int = 200_000) -> List[Tuple[int, ...]]:
    """Every q-subset distorting ``c_max`` files, or ``[]`` if ``C(K, q)`` exceeds ``limit``."""
    if q == 0:
        return [()]
    if math.comb(graph.K, q) > limit:
        return []
    H = graph.biadjacency.astype(np.int16)
    combos = np.array(list(itertools.combinations(range(graph.K), q)), dtype=np.int64)
    counts = H[combos].sum(axis=1)
    hits = (counts >= graph.r_prime).sum(axis=1) == c_max
    return [tuple(int(x) for x in row) for row in combos[hits]]


def fabricate(spec: AttackSpec, honest_gradient, stats: Optional[BatchStats] = None) -> np.ndarray:
    g = np.asarray(honest_gradient, dtype=float)
    if spec.kind is AttackKind.CONSTANT:
        return np.full_like(g, spec.constant_value)
    if spec.kind is AttackKind.REVERSED:
        return -spec.reverse_scale * g
    if stats is None:
        raise MissingStats("ALIE needs per-coordinate mean and std of the honest gradients")
    return stats.mean + spec.alie_z * stats.std
