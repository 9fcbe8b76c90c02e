"""Worker/file assignment graphs.

Every scheme produces an :class:`AssignmentGraph`: a zero-one ``K x f``
biadjacency matrix plus the sorted adjacency lists in both directions.
Numbering follows construction order so downstream reports are reproducible.
"""

from __future__ import annotations

import enum
import hashlib
import json
import warnings
from dataclasses import dataclass, field, replace
from typing import List, Sequence, Tuple

import numpy as np

from .combinatorics import build_mols, is_prime
from .errors import ByzantineFractionWarning, InvalidParams, RNotOdd


class Scheme(str, enum.Enum):
    MOLS = "mols"
    RAMANUJAN_1 = "ramanujan1"
    RAMANUJAN_2 = "ramanujan2"
    FRC = "frc"
    BASELINE = "baseline"

    @property
    def uses_voting(self) -> bool:
        return self is not Scheme.BASELINE


@dataclass(frozen=True)
class ClusterConfig:
    K: int
    f: int
    l: int
    r: int
    scheme: Scheme
    q: int = 0

    def __post_init__(self):
        K, f, l, r = self.K, self.f, self.l, self.r
        if min(K, f, l, r) < 1:
            raise InvalidParams(f"K, f, l, r must be positive: {(K, f, l, r)}")
        if f * r != K * l:
            raise InvalidParams(f"f*r must equal K*l, got {f}*{r} != {K}*{l}")
        if r % 2 == 0:
            raise RNotOdd(f"replication factor must be odd, got r={r}")
        if not 0 <= self.q < K:
            raise InvalidParams(f"need 0 <= q < K, got q={self.q}, K={K}")
        self._check_shape()
        if 2 * self.q >= K:
            warnings.warn(
                f"q/K = {self.q}/{K} is not below 1/2", ByzantineFractionWarning, stacklevel=3
            )

    def _check_shape(self):
        K, f, l, r, s = self.K, self.f, self.l, self.r, self.scheme
        if s in (Scheme.MOLS, Scheme.RAMANUJAN_1):
            ok = K == r * l and f == l * l
        elif s is Scheme.RAMANUJAN_2:
            ok = K == r * r and f == r * l and l % r == 0
        elif s is Scheme.FRC:
            ok = K % r == 0 and f == K // r and l == 1
        else:
            ok = f == K and r == 1 and l == 1
        if not ok:
            raise InvalidParams(f"(K,f,l,r)={(K, f, l, r)} is not a valid {s.value} shape")

    @property
    def r_prime(self) -> int:
        return (self.r + 1) // 2

    @property
    def epsilon(self) -> float:
        return self.q / self.K

    def with_q(self, q: int) -> "ClusterConfig":
        return replace(self, q=q)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class AssignmentGraph:
    config: ClusterConfig
    biadjacency: np.ndarray = field(repr=False)
    worker_files: Tuple[Tuple[int, ...], ...] = field(repr=False)
    file_workers: Tuple[Tuple[int, ...], ...] = field(repr=False)

    @classmethod
    def from_worker_files(cls, config: ClusterConfig, worker_files: Sequence[Sequence[int]]):
        K, f = config.K, config.f
        if len(worker_files) != K:
            raise InvalidParams(f"expected {K} workers, got {len(worker_files)}")
        H = np.zeros((K, f), dtype=np.int8)
        for j, files in enumerate(worker_files):
            H[j, list(files)] = 1
        return cls.from_biadjacency(config, H)

    @classmethod
    def from_biadjacency(cls, config: ClusterConfig, H: np.ndarray):
        H = np.array(H, dtype=np.int8)
        if H.shape != (config.K, config.f):
            raise InvalidParams(f"H has shape {H.shape}, expected {(config.K, config.f)}")
        if not np.isin(H, (0, 1)).all():
            raise InvalidParams("H must be zero-one")
        worker_files = tuple(tuple(int(i) for i in np.flatnonzero(row)) for row in H)
        file_workers = tuple(tuple(int(j) for j in np.flatnonzero(col)) for col in H.T)
        graph = cls(config, _readonly(H), worker_files, file_workers)
        graph._check_regular()
        return graph

    def _check_regular(self):
        c = self.config
        rows = self.biadjacency.sum(axis=1)
        cols = self.biadjacency.sum(axis=0)
        if not (rows == c.l).all() or not (cols == c.r).all():
            raise InvalidParams(
                f"graph is not ({c.l},{c.r})-biregular: row sums {sorted(set(rows.tolist()))}, "
                f"column sums {sorted(set(cols.tolist()))}"
            )

    # convenience accessors
    @property
    def scheme(self) -> Scheme:
        return self.config.scheme

    @property
    def K(self) -> int:
        return self.config.K

    @property
    def f(self) -> int:
        return self.config.f

    @property
    def l(self) -> int:
        return self.config.l

    @property
    def r(self) -> int:
        return self.config.r

    @property
    def r_prime(self) -> int:
        return self.config.r_prime

    @property
    def n_edges(self) -> int:
        return self.K * self.l

    def worker_files_array(self) -> np.ndarray:
        """``K x l`` int32 array of file indices, the layout the kernels consume."""
        return np.ascontiguousarray(np.array(self.worker_files, dtype=np.int32).reshape(self.K, self.l))

    def parallel_classes(self) -> List[Tuple[int, ...]]:
        """Groups of workers whose file sets partition all files."""
        if self.scheme in (Scheme.FRC, Scheme.BASELINE):
            raise InvalidParams(f"{self.scheme.value} graphs have no parallel classes")
        size = self.K // self.r
        return [tuple(range(k * size, (k + 1) * size)) for k in range(self.r)]

    def shared_files(self, a: int, b: int) -> int:
        return len(set(self.worker_files[a]) & set(self.worker_files[b]))

    # export
    def to_dict(self) -> dict:
        c = self.config
        return {
            "scheme": c.scheme.value,
            "K": c.K,
            "f": c.f,
            "l": c.l,
            "r": c.r,
            "worker_files": [list(w) for w in self.worker_files],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":")) + "\n"

    def content_hash(self) -> str:
        return hashlib.sha256(self.to_json().encode("ascii")).hexdigest()

    def allocation_table(self) -> str:
        c = self.config
        lines = [f"scheme={c.scheme.value} (K,f,l,r)=({c.K},{c.f},{c.l},{c.r})"]
        try:
            groups = self.parallel_classes()
        except InvalidParams:
            groups = [tuple(range(c.K))]
        width = len(f"U_{c.K - 1}")
        for k, workers in enumerate(groups):
            if len(groups) > 1:
                lines.append(f"replica {k + 1}")
            lines.append(f"{'Node':<{width}}  Stores")
            for j in workers:
                lines.append(f"{'U_' + str(j):<{width}}  " + ",".join(map(str, self.worker_files[j])))
        return "\n".join(lines) + "\n"


def build_mols_assignment(l: int, r: int) -> AssignmentGraph:
    """MOLS placement: worker ``k*l + s`` stores the cells of symbol ``s`` in square ``k+1``.

    File ``i*l + j`` is cell ``(i, j)`` of the ``l x l`` grid.
    """
    if not is_prime(l):
        raise InvalidParams(f"l must be prime, got {l}")
    if r % 2 == 0:
        raise RNotOdd(f"r must be odd, got {r}")
    if not 2 < r < l:
        raise InvalidParams(f"need 2 < r < l, got r={r}, l={l}")
    mols = build_mols(l, r)
    worker_files = []
    for k in range(r):
        square = mols[k]
        for s in range(l):
            worker_files.append(sorted(i * l + j for i, j in square.positions(s)))
    config = ClusterConfig(K=r * l, f=l * l, l=l, r=r, scheme=Scheme.MOLS)
    return AssignmentGraph.from_worker_files(config, worker_files)


def shift_power(s: int, k: int) -> np.ndarray:
    """``P**k`` for the ``s x s`` cyclic shift with ``P[i, j] = 1`` iff ``j == i - 1 (mod s)``."""
    P = np.zeros((s, s), dtype=np.int8)
    rows = np.arange(s)
    P[rows, (rows - k) % s] = 1
    return P


def array_code_matrix(m: int, s: int) -> np.ndarray:
    """The ``s^2 x ms`` array-code matrix whose block ``(u, v)`` is ``P**(u*v)``."""
    return np.block([[shift_power(s, u * v) for v in range(m)] for u in range(s)])


def build_ramanujan_assignment(m: int, s: int) -> AssignmentGraph:
    """Array-code bigraph: ``H = B.T`` when ``m < s`` (case 1), ``H = B`` otherwise (case 2)."""
    if m < 2:
        raise InvalidParams(f"m must be >= 2, got {m}")
    if not is_prime(s):
        raise InvalidParams(f"s must be prime, got {s}")
    if m >= s and m % s:
        raise InvalidParams(f"case 2 (m >= s) requires s | m, got m={m}, s={s}")
    B = array_code_matrix(m, s)
    if m < s:
        H = B.T
        K, f, l, r, scheme = m * s, s * s, s, m, Scheme.RAMANUJAN_1
    else:
        H = B
        K, f, l, r, scheme = s * s, m * s, m, s, Scheme.RAMANUJAN_2
    if r % 2 == 0:
        raise RNotOdd(f"resulting replication factor r={r} is even")
    config = ClusterConfig(K=K, f=f, l=l, r=r, scheme=scheme)
    return AssignmentGraph.from_biadjacency(config, H)


def build_frc_assignment(K: int, r: int) -> AssignmentGraph:
    """Fractional repetition: ``K/r`` groups of ``r`` workers, group ``g`` holds file ``g``."""
    if r < 1 or K < 1:
        raise InvalidParams(f"K and r must be positive, got K={K}, r={r}")
    if r % 2 == 0:
        raise RNotOdd(f"r must be odd, got {r}")
    if K % r:
        raise InvalidParams(f"r must divide K, got K={K}, r={r}")
    config = ClusterConfig(K=K, f=K // r, l=1, r=r, scheme=Scheme.FRC)
    return AssignmentGraph.from_worker_files(config, [[j // r] for j in range(K)])


def build_baseline_assignment(K: int) -> AssignmentGraph:
    if K < 1:
        raise InvalidParams(f"K must be >= 1, got {K}")
    config = ClusterConfig(K=K, f=K, l=1, r=1, scheme=Scheme.BASELINE)
    return AssignmentGraph.from_worker_files(config, [[j] for j in range(K)])


def build_assignment(scheme, *, l=None, r=None, m=None, s=None, K=None) -> AssignmentGraph:
    """Dispatch on a scheme name; ``ramanujan`` picks case 1 or 2 from ``(m, s)``."""
    name = scheme.value if isinstance(scheme, Scheme) else str(scheme).lower()

    def need(**kw):
        missing = [k for k, v in kw.items() if v is None]
        if missing:
            raise InvalidParams(f"scheme {name} requires --{', --'.join(missing)}")

    if name == "mols":
        need(l=l, r=r)
        return build_mols_assignment(l, r)
    if name in ("ramanujan", "ramanujan1", "ramanujan2"):
        need(m=m, s=s)
        graph = build_ramanujan_assignment(m, s)
        if name != "ramanujan" and graph.scheme.value != name:
            raise InvalidParams(f"(m={m}, s={s}) yields {graph.scheme.value}, not {name}")
        return graph
    if name == "frc":
        need(K=K, r=r)
        return build_frc_assignment(K, r)
    if name == "baseline":
        need(K=K)
        return build_baseline_assignment(K)
    raise InvalidParams(f"unknown scheme {scheme!r}")
