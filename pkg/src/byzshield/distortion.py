"""Worst-case distortion: how many files can ``q`` colluding workers corrupt?

A file is distorted when at least ``r' = (r+1)/2`` of its ``r`` copies come from
Byzantine workers. The exact maximum over all q-subsets is found by
enumeration (compiled kernel when available); a greedy + swap local search
provides certified lower bounds when enumeration is over budget.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import _backend
from .assignment import AssignmentGraph, Scheme
from .errors import InvalidParams, OutOfRegime
from .spectral import compute_bounds, compute_spectrum

DEFAULT_BUDGET = 10**8


@dataclass(frozen=True)
class DistortionReport:
    q: int
    c_max: int
    epsilon_hat: float
    witness: Tuple[int, ...]
    gamma: float
    exhaustive: bool
    visited: int = 0


def count_distorted(graph: AssignmentGraph, byz: Sequence[int]) -> int:
    byz = sorted(set(int(j) for j in byz))
    if any(not 0 <= j < graph.K for j in byz):
        raise InvalidParams(f"worker index out of range for K={graph.K}")
    if not byz:
        return 0
    copies = graph.biadjacency[byz].sum(axis=0)
    return int((copies >= graph.r_prime).sum())


def distorted_files(graph: AssignmentGraph, byz: Sequence[int]) -> List[int]:
    byz = sorted(set(int(j) for j in byz))
    if not byz:
        return []
    copies = graph.biadjacency[byz].sum(axis=0)
    return [int(i) for i in np.flatnonzero(copies >= graph.r_prime)]


def _report(graph, q, c_max, witness, exhaustive, visited, gamma=None) -> DistortionReport:
    if gamma is None:
        gamma = compute_bounds(graph, q).gamma
    return DistortionReport(q, c_max, c_max / graph.f, tuple(witness), gamma, exhaustive, visited)


def _check_q(graph, q):
    if not 0 <= q <= graph.K:
        raise InvalidParams(f"need 0 <= q <= K, got q={q}, K={graph.K}")


def max_distortion_exhaustive(
    graph: AssignmentGraph,
    q: int,
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
    backend: Optional[str] = None,
    gamma: Optional[float] = None,
) -> DistortionReport:
    """Exact ``c_max`` over all ``C(K, q)`` coalitions, or a heuristic bound if over budget.

    The search is split by the smallest member of the coalition; chunks are
    reduced in order, so the witness (lexicographically smallest maximiser)
    does not depend on ``threads``.
    """
    _check_q(graph, q)
    if q == 0:
        return _report(graph, 0, 0, (), True, 1, gamma)
    if math.comb(graph.K, q) > budget:
        return max_distortion_heuristic(graph, q, gamma=gamma)

    kernel = _backend.get_kernel(backend)
    wf = graph.worker_files_array()
    f, thr = graph.f, graph.r_prime
    firsts = range(graph.K - q + 1)

    def run(first):
        return kernel(wf, f, q, thr, first, first + 1)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, firsts))
    else:
        parts = [run(first) for first in firsts]

    best, witness, visited = -1, (), 0
    for value, wit, n in parts:
        visited += n
        if value > best:
            best, witness = value, wit
    return _report(graph, q, best, witness, True, visited, gamma)


def _objective(counts: np.ndarray, thr: int) -> Tuple[int, int]:
    # distorted files first, then total progress toward the threshold
    return int((counts >= thr).sum()), int(np.minimum(counts, thr).sum())


def _local_search(H: np.ndarray, members: List[int], thr: int) -> List[int]:
    K = H.shape[0]
    members = sorted(members)
    counts = H[members].sum(axis=0)
    current = _objective(counts, thr)
    while True:
        outside = [j for j in range(K) if j not in set(members)]
        if not outside:
            return members
        base = counts[None, None, :] - H[members][:, None, :] + H[outside][None, :, :]
        dist = (base >= thr).sum(axis=2)
        prog = np.minimum(base, thr).sum(axis=2)
        best = current
        move = None
        for a in range(len(members)):
            for b in range(len(outside)):
                cand = (int(dist[a, b]), int(prog[a, b]))
                if cand > best:
                    best, move = cand, (a, b)
        if move is None:
            return members
        a, b = move
        counts = base[a, b]
        members = sorted(members[:a] + members[a + 1:] + [outside[b]])
        current = best


def _greedy(H: np.ndarray, seed: int, q: int, thr: int) -> List[int]:
    K = H.shape[0]
    members = [seed]
    counts = H[seed].astype(np.int64).copy()
    overlap = H @ H.T
    while len(members) < q:
        best, pick = None, None
        for j in range(K):
            if j in members:
                continue
            cand = counts + H[j]
            key = (
                int((cand >= thr).sum()),
                int(overlap[j, members].sum()),
                int(np.minimum(cand, thr).sum()),
            )
            if best is None or key > best:
                best, pick = key, j
        members.append(pick)
        counts = counts + H[pick]
    return members


def max_distortion_heuristic(
    graph: AssignmentGraph,
    q: int,
    gamma: Optional[float] = None,
    kicks: int = 300,
    seed: int = 0,
) -> DistortionReport:
    """Lower bound on ``c_max`` by greedy construction plus swap local search.

    One greedy restart per seed worker grows the coalition by distorted-file
    gain, then pairwise file overlap; each start is polished by best-improvement
    swaps. The best fixed point is then perturbed ``kicks`` times (two random
    members replaced, seeded RNG) and re-polished, keeping non-worsening moves.
    """
    _check_q(graph, q)
    if q == 0:
        return _report(graph, 0, 0, (), False, 0, gamma)
    H = graph.biadjacency.astype(np.int64)
    K, thr = graph.K, graph.r_prime

    def score(members):
        return _objective(H[list(members)].sum(axis=0), thr)

    best_set, best_key, seen = (), None, set()
    for start_worker in range(K - q + 1):
        start = tuple(sorted(_greedy(H, start_worker, q, thr)))
        if start in seen:
            continue
        seen.add(start)
        members = tuple(_local_search(H, list(start), thr))
        key = score(members)
        if best_key is None or key > best_key or (key == best_key and members < best_set):
            best_set, best_key = members, key

    rng = np.random.default_rng(seed)
    current, current_key = best_set, best_key
    n_kick = min(2, q, K - q)
    for _ in range(kicks if n_kick else 0):
        drop = set(rng.choice(current, size=n_kick, replace=False).tolist())
        pool = [j for j in range(K) if j not in current]
        add = rng.choice(pool, size=n_kick, replace=False).tolist()
        trial = [j for j in current if j not in drop] + add
        trial = tuple(_local_search(H, trial, thr))
        key = score(trial)
        if key >= current_key:
            current, current_key = trial, key
            if key > best_key or (key == best_key and trial < best_set):
                best_set, best_key = trial, key

    value = count_distorted(graph, best_set)
    return _report(graph, q, value, best_set, False, len(seen) + kicks, gamma)


def epsilon_frc(K: int, r: int, q: int) -> float:
    """Worst-case distorted fraction for fractional repetition: ``floor(q/r') * r / K``."""
    if K % r:
        raise InvalidParams(f"r must divide K, got K={K}, r={r}")
    r_prime = (r + 1) // 2
    return min(1.0, (q // r_prime) * r / K)


def epsilon_baseline(K: int, q: int) -> float:
    return q / K


def exact_small_q(graph: AssignmentGraph, q: int) -> int:
    """Closed-form ``c_max`` for ``q <= r`` on MOLS and array-code graphs.

    Not exact for case-2 array-code graphs with ``m > s``: there ``P^s = I``
    repeats block columns, so two workers can share more than one file.
    """
    if graph.scheme not in (Scheme.MOLS, Scheme.RAMANUJAN_1, Scheme.RAMANUJAN_2):
        raise InvalidParams(f"no closed form for {graph.scheme.value}")
    r, rp = graph.r, graph.r_prime
    if q > r:
        raise OutOfRegime(f"closed form holds for q <= r={r}, got q={q}")
    if r == 3:
        return {0: 0, 1: 0, 2: 1, 3: 3}[q]
    if q < rp:
        return 0
    return 1 if q < r else 2


@dataclass(frozen=True)
class TableRow:
    q: int
    c_max: int
    eps_byzshield: float
    eps_baseline: float
    eps_frc: float
    gamma: float
    exhaustive: bool


def distortion_table(
    graph: AssignmentGraph,
    qmin: int,
    qmax: int,
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
    backend: Optional[str] = None,
) -> List[TableRow]:
    if qmin > qmax:
        raise InvalidParams(f"qmin={qmin} exceeds qmax={qmax}")
    spectrum = compute_spectrum(graph)
    rows = []
    K, r = graph.K, graph.r
    for q in range(qmin, qmax + 1):
        gamma = compute_bounds(graph, q, spectrum).gamma
        rep = max_distortion_exhaustive(graph, q, budget, threads, backend, gamma=gamma)
        frc = epsilon_frc(K, r, q) if K % r == 0 else math.nan
        rows.append(
            TableRow(q, rep.c_max, rep.epsilon_hat, epsilon_baseline(K, q), frc, gamma, rep.exhaustive)
        )
    return rows
