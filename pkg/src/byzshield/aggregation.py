"""Parameter-server defenses: per-file majority vote, then a robust aggregator.

All aggregators take a sequence of equal-length vectors and return one
vector. Outputs do not depend on input order, except ``median_of_means``
which groups consecutive inputs by design (the pipeline feeds it in file
order).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .assignment import AssignmentGraph
from .errors import EmptyInput, InvalidParams, TooFewOperands, WrongArity


class AggregatorKind(str, enum.Enum):
    MEAN = "mean"
    CW_MEDIAN = "cw_median"
    MEDIAN_OF_MEANS = "median_of_means"
    MULTI_KRUM = "multi_krum"
    BULYAN = "bulyan"
    SIGNSGD = "signsgd"


@dataclass(frozen=True)
class AggregatorSpec:
    kind: AggregatorKind = AggregatorKind.CW_MEDIAN
    group_size: int = 1
    krum_m: int = 1
    byz_bound: Optional[int] = None
    vote_tolerance: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", AggregatorKind(self.kind))
        if self.group_size < 1:
            raise InvalidParams("group_size must be >= 1")
        if self.krum_m < 1:
            raise InvalidParams("krum_m must be >= 1")
        if self.byz_bound is not None and self.byz_bound < 0:
            raise InvalidParams("byz_bound must be >= 0")


@dataclass(frozen=True, eq=False)
class GradientMessage:
    worker: int
    file: int
    vector: np.ndarray


@dataclass(frozen=True, eq=False)
class MajorityOutcome:
    file: int
    vector: np.ndarray
    vote_count: int
    voters: Tuple[int, ...] = ()
    distorted: bool = False


def _stack(vectors) -> np.ndarray:
    if len(vectors) == 0:
        raise EmptyInput("no vectors to aggregate")
    X = np.asarray([np.asarray(v, dtype=float) for v in vectors])
    if X.ndim != 2:
        raise InvalidParams("vectors must share one dimension")
    return X


def _close(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    scale = max(np.linalg.norm(a), np.linalg.norm(b))
    return bool(np.linalg.norm(a - b) <= tol * scale) if scale > 0 else True


def majority_vote(
    messages: Sequence[GradientMessage], r: int, tolerance: Optional[float] = None
) -> MajorityOutcome:
    """Plurality vote over the ``r`` copies of one file.

    Copies are grouped by exact bitwise equality, or by relative distance
    ``tolerance`` when given. Ties go to the group holding the smallest
    worker index.
    """
    if len(messages) != r:
        raise WrongArity(f"expected {r} messages, got {len(messages)}")
    files = {m.file for m in messages}
    if len(files) != 1:
        raise InvalidParams(f"messages span several files: {sorted(files)}")
    workers = [m.worker for m in messages]
    if len(set(workers)) != len(workers):
        raise InvalidParams("duplicate worker in vote")

    groups: List[List[GradientMessage]] = []
    keys: Dict[bytes, int] = {}
    for msg in sorted(messages, key=lambda m: m.worker):
        vec = np.asarray(msg.vector, dtype=float)
        if tolerance is None:
            k = vec.tobytes()
            if k in keys:
                groups[keys[k]].append(msg)
            else:
                keys[k] = len(groups)
                groups.append([msg])
        else:
            for g in groups:
                if _close(np.asarray(g[0].vector, dtype=float), vec, tolerance):
                    g.append(msg)
                    break
            else:
                groups.append([msg])

    # groups are created in worker order, so the first maximal group has the smallest worker
    winner = max(groups, key=len)
    return MajorityOutcome(
        file=files.pop(),
        vector=np.asarray(winner[0].vector, dtype=float),
        vote_count=len(winner),
        voters=tuple(m.worker for m in winner),
    )


def mean(vectors) -> np.ndarray:
    X = _stack(vectors)
    # sorting each column makes the floating-point sum order-independent
    return np.sort(X, axis=0).sum(axis=0) / X.shape[0]


def cw_median(vectors) -> np.ndarray:
    return np.median(_stack(vectors), axis=0)


def median_of_means(vectors, group_size: int) -> np.ndarray:
    X = _stack(vectors)
    if group_size < 1:
        raise InvalidParams("group_size must be >= 1")
    means = [mean(X[i:i + group_size]) for i in range(0, X.shape[0], group_size)]
    return cw_median(means)


def _canonical_order(X: np.ndarray) -> np.ndarray:
    """Row indices sorted lexicographically by content."""
    return np.lexsort(X.T[::-1])


def _krum_scores(X: np.ndarray, byz_bound: int) -> np.ndarray:
    n = X.shape[0]
    sq = np.sum(X * X, axis=1)
    D = np.maximum(sq[:, None] + sq[None, :] - 2.0 * X @ X.T, 0.0)
    k = n - byz_bound - 2
    scores = np.empty(n)
    for i in range(n):
        others = np.sort(np.delete(D[i], i))
        scores[i] = others[:k].sum()
    return scores


def _krum_select(X: np.ndarray, byz_bound: int, m: int) -> np.ndarray:
    """Indices (into canonically ordered X) of the m lowest Krum scores."""
    scores = _krum_scores(X, byz_bound)
    order = np.argsort(scores, kind="stable")
    return order[:m]


def multi_krum(vectors, byz_bound: int, m: int = 1) -> np.ndarray:
    X = _stack(vectors)
    n = X.shape[0]
    if n < 2 * byz_bound + 3:
        raise TooFewOperands("Multi-Krum", n, 2 * byz_bound + 3, byz_bound)
    if not 1 <= m <= n:
        raise InvalidParams(f"krum m must be in [1, {n}], got {m}")
    X = X[_canonical_order(X)]
    chosen = np.sort(_krum_select(X, byz_bound, m))
    return mean(X[chosen])


def bulyan(vectors, byz_bound: int) -> np.ndarray:
    """Repeated Krum selects ``n - 2b`` vectors; each coordinate then averages the
    ``n - 4b`` selected values closest to that coordinate's median."""
    X = _stack(vectors)
    n = X.shape[0]
    if n < 4 * byz_bound + 3:
        raise TooFewOperands("Bulyan", n, 4 * byz_bound + 3, byz_bound)
    remaining = X[_canonical_order(X)]
    selected = []
    for _ in range(n - 2 * byz_bound):
        idx = int(_krum_select(remaining, byz_bound, 1)[0])
        selected.append(remaining[idx])
        remaining = np.delete(remaining, idx, axis=0)
    S = np.sort(np.asarray(selected), axis=0)
    beta = n - 4 * byz_bound
    med = np.median(S, axis=0)
    out = np.empty(S.shape[1])
    for c in range(S.shape[1]):
        closest = np.argsort(np.abs(S[:, c] - med[c]), kind="stable")[:beta]
        out[c] = np.sort(S[closest, c]).sum() / beta
    return out


def signsgd_majority(vectors) -> np.ndarray:
    X = _stack(vectors)
    return np.sign(np.sign(X).sum(axis=0))


def aggregate(vectors, spec: AggregatorSpec) -> np.ndarray:
    kind = spec.kind
    if kind is AggregatorKind.MEAN:
        return mean(vectors)
    if kind is AggregatorKind.CW_MEDIAN:
        return cw_median(vectors)
    if kind is AggregatorKind.MEDIAN_OF_MEANS:
        return median_of_means(vectors, spec.group_size)
    if kind is AggregatorKind.SIGNSGD:
        return signsgd_majority(vectors)
    if spec.byz_bound is None:
        raise InvalidParams(f"{kind.value} needs byz_bound")
    if kind is AggregatorKind.MULTI_KRUM:
        return multi_krum(vectors, spec.byz_bound, spec.krum_m)
    return bulyan(vectors, spec.byz_bound)


def vote_all(
    graph: AssignmentGraph,
    messages: Sequence[GradientMessage],
    tolerance: Optional[float] = None,
) -> List[MajorityOutcome]:
    """Majority outcome for every file, in file order."""
    by_file: Dict[int, List[GradientMessage]] = {i: [] for i in range(graph.f)}
    for msg in messages:
        if msg.file not in graph.worker_files[msg.worker]:
            raise InvalidParams(f"worker {msg.worker} is not assigned file {msg.file}")
        by_file[msg.file].append(msg)
    return [majority_vote(by_file[i], graph.r, tolerance) for i in range(graph.f)]


def pipeline(
    graph: AssignmentGraph,
    messages: Sequence[GradientMessage],
    aggregator: AggregatorSpec,
) -> np.ndarray:
    """Vote per file, then aggregate the ``f`` outcomes.

    The baseline scheme skips voting and aggregates the ``K`` raw vectors.
    """
    if not graph.scheme.uses_voting:
        ordered = sorted(messages, key=lambda m: m.worker)
        if len(ordered) != graph.K:
            raise WrongArity(f"expected {graph.K} messages, got {len(ordered)}")
        return aggregate([m.vector for m in ordered], aggregator)
    outcomes = vote_all(graph, messages, aggregator.vote_tolerance)
    return aggregate([o.vector for o in outcomes], aggregator)
