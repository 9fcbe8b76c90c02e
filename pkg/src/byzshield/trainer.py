"""Synchronous parameter-server SGD with redundant file assignment.

Per-sample gradients are rounded onto a dyadic grid (multiples of 2**-30)
before they are summed. Sums of grid values are exact in float64 while the
partial sums stay below 2**23, so a file gradient does not depend on how the
batch was split or summed: honest replicas agree bit for bit, and with no
attack every scheme reproduces the plain mini-batch trajectory exactly.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import List, Optional, Tuple

import numpy as np

from .aggregation import (
    AggregatorKind,
    AggregatorSpec,
    GradientMessage,
    aggregate,
    vote_all,
)
from .assignment import AssignmentGraph
from .attacks import AttackSpec, batch_stats, fabricate, optimal_coalitions
from .distortion import count_distorted
from .errors import Diverged, InvalidParams

GRID_BITS = 30
GRID = 2.0**-GRID_BITS
EXACT_LIMIT = 2.0 ** (52 - GRID_BITS)


def lr_schedule(eta0: float, y: float, z: int, t: int) -> float:
    """``eta0 * y**floor(t / z)``: start at eta0, multiply by y every z iterations."""
    if eta0 <= 0 or not 0 < y <= 1 or z < 1:
        raise InvalidParams(f"bad schedule ({eta0}, {y}, {z})")
    return eta0 * y ** (t // z)


def quantize(g: np.ndarray) -> np.ndarray:
    return np.round(g * 2.0**GRID_BITS) * GRID


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _log1pexp(z):
    return np.logaddexp(0.0, z)


# models ---------------------------------------------------------------------


class LinearRegression:
    name = "linear_regression"
    classification = False

    def __init__(self, n_features: int):
        self.n_features = n_features
        self.n_params = n_features

    def init(self, rng) -> np.ndarray:
        return np.zeros(self.n_params)

    def per_sample_grads(self, w, X, y):
        resid = X @ w - y
        return resid[:, None] * X

    def loss(self, w, X, y):
        return float(0.5 * np.mean((X @ w - y) ** 2))

    def predict(self, w, X):
        return X @ w


class Logistic:
    name = "logistic"
    classification = True

    def __init__(self, n_features: int):
        self.n_features = n_features
        self.n_params = n_features

    def init(self, rng) -> np.ndarray:
        return np.zeros(self.n_params)

    def per_sample_grads(self, w, X, y):
        return (_sigmoid(X @ w) - y)[:, None] * X

    def loss(self, w, X, y):
        z = X @ w
        return float(np.mean(_log1pexp(z) - y * z))

    def predict(self, w, X):
        return (X @ w > 0).astype(float)


class MLP:
    """One tanh hidden layer, sigmoid output, binary cross-entropy."""

    name = "mlp"
    classification = True

    def __init__(self, n_features: int, hidden: int = 16):
        self.n_features = n_features
        self.hidden = hidden
        self.n_params = hidden * n_features + 2 * hidden + 1

    def unpack(self, w):
        p, h = self.n_features, self.hidden
        W1 = w[: h * p].reshape(h, p)
        b1 = w[h * p : h * p + h]
        w2 = w[h * p + h : h * p + 2 * h]
        b2 = w[-1]
        return W1, b1, w2, b2

    def init(self, rng) -> np.ndarray:
        w = np.zeros(self.n_params)
        p, h = self.n_features, self.hidden
        w[: h * p] = rng.normal(0.0, 1.0 / math.sqrt(p), size=h * p)
        w[h * p + h : h * p + 2 * h] = rng.normal(0.0, 1.0 / math.sqrt(h), size=h)
        return w

    def _forward(self, w, X):
        W1, b1, w2, b2 = self.unpack(w)
        A = np.tanh(X @ W1.T + b1)
        return A, A @ w2 + b2

    def per_sample_grads(self, w, X, y):
        W1, b1, w2, b2 = self.unpack(w)
        A, z = self._forward(w, X)
        dz = _sigmoid(z) - y
        dA = dz[:, None] * w2[None, :] * (1.0 - A * A)
        gW1 = (dA[:, :, None] * X[:, None, :]).reshape(X.shape[0], -1)
        return np.hstack([gW1, dA, dz[:, None] * A, dz[:, None]])

    def loss(self, w, X, y):
        _, z = self._forward(w, X)
        return float(np.mean(_log1pexp(z) - y * z))

    def predict(self, w, X):
        return (self._forward(w, X)[1] > 0).astype(float)


def make_model(name: str, n_features: int, hidden: int = 16):
    name = name.lower()
    if name in ("linear", "linear_regression"):
        return LinearRegression(n_features)
    if name == "logistic":
        return Logistic(n_features)
    if name == "mlp":
        return MLP(n_features, hidden)
    raise InvalidParams(f"unknown model {name!r}")


def file_gradient(model, w, X, y) -> np.ndarray:
    """Sum of per-sample loss gradients over one file, on the exact-summation grid."""
    if len(X) == 0:
        raise InvalidParams("a file must hold at least one sample")
    g = quantize(model.per_sample_grads(w, np.asarray(X), np.asarray(y)))
    total = np.zeros(g.shape[1])
    for row in g:
        total += row
    return total


# data -----------------------------------------------------------------------


def make_separable(n: int, d: int, rng, margin: float = 0.5) -> Tuple[np.ndarray, np.ndarray]:
    """Gaussian features labelled by a random hyperplane through the origin.

    Each sample is then pushed ``margin`` further from the hyperplane along its
    unit normal, leaving a gap of ``2 * margin`` between the classes.
    """
    u = rng.normal(size=d)
    u /= np.linalg.norm(u)
    X = rng.normal(size=(n, d))
    side = np.where(X @ u > 0, 1.0, -1.0)
    X += np.outer(side * margin, u)
    return X, (side > 0).astype(float)


def make_gaussian_mixture(n: int, d: int, rng, separation: float = 2.0):
    """Two isotropic Gaussian blobs at ``+-separation/2`` along a random unit direction."""
    u = rng.normal(size=d)
    u /= np.linalg.norm(u)
    y = rng.integers(0, 2, size=n).astype(float)
    X = rng.normal(size=(n, d)) + np.outer(2 * y - 1, u) * separation / 2
    return X, y


def make_regression(n: int, d: int, rng, noise: float = 0.1):
    w_star = rng.normal(size=d)
    X = rng.normal(size=(n, d))
    return X, X @ w_star + noise * rng.normal(size=n)


def make_dataset(model_name: str, n: int, d: int, seed: int, kind: str = "auto", margin: float = 0.5):
    """Training set of ``n`` samples plus a held-out probe set drawn from the same law."""
    rng = np.random.default_rng([seed, 0])
    if kind == "auto":
        kind = {"logistic": "separable", "mlp": "mixture"}.get(model_name, "regression")
    m = n + PROBE_SIZE
    if kind == "separable":
        X, y = make_separable(m, d, rng, margin)
    elif kind == "mixture":
        X, y = make_gaussian_mixture(m, d, rng)
    elif kind == "regression":
        X, y = make_regression(m, d, rng)
    else:
        raise InvalidParams(f"unknown dataset {kind!r}")
    return X[:n], y[:n], X[n:], y[n:]


PROBE_SIZE = 1000


# training -------------------------------------------------------------------


class UpdateNorm(str, enum.Enum):
    PER_FILE = "per_file"
    PER_SAMPLE = "per_sample"


@dataclass(frozen=True)
class TrainConfig:
    n: int = 10_000
    d: int = 20
    b: int = 750
    eta: Tuple[float, float, int] = (1.0, 1.0, 1)
    T: int = 500
    seed: int = 0
    model: str = "logistic"
    hidden: int = 16
    update_norm: UpdateNorm = UpdateNorm.PER_FILE
    momentum: float = 0.0
    dataset: str = "auto"
    margin: float = 0.5
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "update_norm", UpdateNorm(self.update_norm))
        object.__setattr__(self, "eta", tuple(self.eta))
        if self.b > self.n:
            raise InvalidParams(f"batch size b={self.b} exceeds n={self.n}")
        if self.T < 0 or self.b < 1:
            raise InvalidParams("T must be >= 0 and b >= 1")
        if not 0 <= self.momentum < 1:
            raise InvalidParams("momentum must be in [0, 1)")
        lr_schedule(*self.eta, 0)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["update_norm"] = self.update_norm.value
        out["eta"] = list(self.eta)
        return out


@dataclass
class ModelState:
    w: np.ndarray
    t: int = 0


@dataclass(frozen=True)
class IterationLog:
    t: int
    loss: float
    accuracy: float
    distorted_files: int
    lr: float
    update_norm: float


class Simulation:
    """One training run; :meth:`run` returns the per-iteration logs.

    Batches, initial weights and Byzantine reselection draw from separate
    seeded streams, so two runs that differ only in the assignment graph see
    the same batches.
    """

    def __init__(self, graph: AssignmentGraph, attack: AttackSpec, aggregator: AggregatorSpec, cfg: TrainConfig):
        if cfg.b % graph.f:
            raise InvalidParams(f"f={graph.f} must divide b={cfg.b}")
        attack.check_graph(graph)
        self.graph = graph
        self.attack = attack
        self.cfg = cfg
        self.model = make_model(cfg.model, cfg.d, cfg.hidden)
        self.X, self.y, self.X_probe, self.y_probe = make_dataset(
            self.model.name, cfg.n, cfg.d, cfg.seed, cfg.dataset, cfg.margin
        )
        self.state = ModelState(self.model.init(np.random.default_rng([cfg.seed, 1])))
        self._batch_rng = np.random.default_rng([cfg.seed, 2])
        self._attack_rng = np.random.default_rng([cfg.seed, 3])
        self._perm = np.empty(0, dtype=np.int64)
        self._velocity = np.zeros_like(self.state.w)
        self.byzantine_set = attack.byzantine_set
        self.c_max = count_distorted(graph, self.byzantine_set) if graph.scheme.uses_voting else attack.q
        if aggregator.byz_bound is None and aggregator.kind in (AggregatorKind.MULTI_KRUM, AggregatorKind.BULYAN):
            aggregator = AggregatorSpec(
                aggregator.kind, aggregator.group_size, aggregator.krum_m, self.c_max, aggregator.vote_tolerance
            )
        self.aggregator = aggregator
        self._coalitions = None
        if attack.reselect_each_iter and attack.q:
            self._coalitions = optimal_coalitions(graph, attack.q, self.c_max) or [self.byzantine_set]

    # batching
    def _next_batch(self) -> np.ndarray:
        b = self.cfg.b
        if len(self._perm) < b:
            self._perm = self._batch_rng.permutation(self.cfg.n)
        batch, self._perm = self._perm[:b], self._perm[b:]
        return batch

    def _files(self, batch) -> List[np.ndarray]:
        size = self.cfg.b // self.graph.f
        return [batch[i * size : (i + 1) * size] for i in range(self.graph.f)]

    def accuracy(self, X=None, y=None) -> float:
        X = self.X if X is None else X
        y = self.y if y is None else y
        if not self.model.classification:
            return math.nan
        return float(np.mean(self.model.predict(self.state.w, X) == y))

    def _worker_messages(self, j, files, w, true_grads, stats, byz) -> List[GradientMessage]:
        out = []
        for i in self.graph.worker_files[j]:
            if j in byz:
                vec = fabricate(self.attack, true_grads[i], stats)
            else:
                idx = files[i]
                vec = file_gradient(self.model, w, self.X[idx], self.y[idx])
            out.append(GradientMessage(j, i, vec))
        return out

    def step(self) -> IterationLog:
        cfg, graph = self.cfg, self.graph
        w = self.state.w
        files = self._files(self._next_batch())
        if self._coalitions is not None:
            self.byzantine_set = self._coalitions[int(self._attack_rng.integers(len(self._coalitions)))]
        byz = set(self.byzantine_set)

        # the adversary is omniscient: it sees every true file gradient
        true_grads = [file_gradient(self.model, w, self.X[idx], self.y[idx]) for idx in files]
        stats = batch_stats(true_grads) if byz else None

        def work(j):
            return self._worker_messages(j, files, w, true_grads, stats, byz)

        if cfg.threads > 1:
            with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
                per_worker = list(pool.map(work, range(graph.K)))
        else:
            per_worker = [work(j) for j in range(graph.K)]
        messages = [m for msgs in per_worker for m in msgs]

        if graph.scheme.uses_voting:
            outcomes = vote_all(graph, messages, self.aggregator.vote_tolerance)
            voted = [o.vector for o in outcomes]
        else:
            voted = [m.vector for m in sorted(messages, key=lambda m: m.worker)]
        distorted = sum(not np.array_equal(v, g) for v, g in zip(voted, true_grads))

        per_file = cfg.b // graph.f
        if self.aggregator.kind is AggregatorKind.MEAN:
            total = np.zeros_like(w)
            for v in voted:
                total += v
            update = total / cfg.b
        elif cfg.update_norm is UpdateNorm.PER_FILE:
            update = aggregate([v / per_file for v in voted], self.aggregator)
        else:
            update = aggregate(voted, self.aggregator) / per_file

        lr = lr_schedule(*cfg.eta, self.state.t)
        if cfg.momentum:
            self._velocity = cfg.momentum * self._velocity + update
            update = self._velocity
        new_w = w - lr * update
        self.state = ModelState(new_w, self.state.t + 1)
        if not np.all(np.isfinite(new_w)):
            raise Diverged(f"non-finite parameters at iteration {self.state.t}")
        if any(np.max(np.abs(g)) >= EXACT_LIMIT for g in true_grads):
            raise Diverged(f"gradient magnitude left the exact-summation range at iteration {self.state.t}")

        return IterationLog(
            t=self.state.t,
            loss=self.model.loss(new_w, self.X_probe, self.y_probe),
            accuracy=self.accuracy(self.X_probe, self.y_probe),
            distorted_files=int(distorted),
            lr=lr,
            update_norm=float(np.linalg.norm(new_w - w)),
        )

    def run(self, T: Optional[int] = None) -> List[IterationLog]:
        logs = []
        for _ in range(self.cfg.T if T is None else T):
            try:
                logs.append(self.step())
            except Diverged as exc:
                exc.logs = logs
                raise
        return logs


def run_training(graph, attack: AttackSpec, aggregator: AggregatorSpec, cfg: TrainConfig) -> List[IterationLog]:
    return Simulation(graph, attack, aggregator, cfg).run()
