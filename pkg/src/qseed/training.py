"""Training and evaluation harness for the tree-circuit edge classifier.

One SGD update per subgraph: the weighted binary cross entropy gradient is
averaged over the subgraph's edges (chain rule through the parameter-shift
circuit gradient) and applied once. Metrics are confusion-matrix based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DataError, NumericError
from .hitgraph import SubGraph
from .statevector import ShotConfig
from .ttn import FeatureScaler, TTNParams, ttn_forward, ttn_gradient


@dataclass
class TrainConfig:
    epochs: int = 2
    learning_rate: float = 0.01
    split_ratio: float = 0.9
    threshold: float = 0.5
    seed: int = 0
    eps: float = 1e-7

    def __post_init__(self) -> None:
        if not 0.0 < self.split_ratio < 1.0:
            raise ValueError("split_ratio must be in (0, 1)")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must be in (0, 1)")
        if self.learning_rate < 0.0:
            raise ValueError("learning_rate must be non-negative")


@dataclass
class Metrics:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def purity(self) -> Optional[float]:
        denom = self.tp + self.fp
        return self.tp / denom if denom else None

    @property
    def efficiency(self) -> Optional[float]:
        denom = self.tp + self.fn
        return self.tp / denom if denom else None

    @property
    def accuracy(self) -> Optional[float]:
        return (self.tp + self.tn) / self.total if self.total else None


@dataclass
class UpdateRecord:
    update: int
    subgraph: str
    loss: float


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    metrics: Optional[Metrics]


@dataclass
class History:
    updates: List[UpdateRecord] = field(default_factory=list)
    epochs: List[EpochRecord] = field(default_factory=list)


def subgraph_id(g: SubGraph) -> str:
    return f"evt{g.event_id}_s{g.sector[0]}{g.sector[1]}"


def edge_raw_features(
    g: SubGraph, edge: Tuple[int, int, int]
) -> np.ndarray:
    """(r, phi, z) of both endpoints, inner hit (smaller r) first."""
    src, dst, _ = edge
    a = g.nodes[src]
    b = g.nodes[dst]
    if b[0] < a[0]:
        a, b = b, a
    return np.array([a[0], a[1], a[2], b[0], b[1], b[2]])


def collect_features(subgraphs: Sequence[SubGraph]) -> np.ndarray:
    """Raw feature rows for every edge of every subgraph (scaler fitting)."""
    rows = [edge_raw_features(g, e) for g in subgraphs for e in g.edges]
    if not rows:
        raise DataError("no edges in the given subgraphs")
    return np.stack(rows)


def split_dataset(
    subgraphs: Sequence[SubGraph], split_ratio: float, seed: int
) -> Tuple[List[SubGraph], List[SubGraph]]:
    """Seeded shuffle, then first ceil(ratio * N) subgraphs to train."""
    if len(subgraphs) < 2:
        raise DataError(f"need >= 2 subgraphs to split, got {len(subgraphs)}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(subgraphs))
    n_train = math.ceil(split_ratio * len(subgraphs))
    train = [subgraphs[i] for i in order[:n_train]]
    test = [subgraphs[i] for i in order[n_train:]]
    return train, test


def weighted_bce(
    pred: float, label: int, w_true: float, w_fake: float, eps: float = 1e-7
) -> float:
    """-[w_true * y * ln(p) + w_fake * (1 - y) * ln(1 - p)], p clamped."""
    p = min(max(pred, eps), 1.0 - eps)
    if label:
        return -w_true * math.log(p)
    return -w_fake * math.log(1.0 - p)


def _bce_dpred(
    pred: float, label: int, w_true: float, w_fake: float, eps: float
) -> float:
    """d loss / d pred; zero where the clamp is active."""
    if pred <= eps or pred >= 1.0 - eps:
        return 0.0
    if label:
        return -w_true / pred
    return w_fake / (1.0 - pred)


def class_weights(g: SubGraph) -> Tuple[float, float]:
    """Balance weights w = E / (2 * E_class); absent classes fall back to 1."""
    n_edges = len(g.edges)
    n_true = sum(label for _, _, label in g.edges)
    n_fake = n_edges - n_true
    w_true = n_edges / (2.0 * n_true) if n_true else 1.0
    w_fake = n_edges / (2.0 * n_fake) if n_fake else 1.0
    return w_true, w_fake


def subgraph_loss(
    g: SubGraph, params: TTNParams, scaler: FeatureScaler, cfg: TrainConfig
) -> float:
    """Mean weighted BCE over the subgraph's edges (no update)."""
    if not g.edges:
        raise DataError("subgraph has no edges")
    w_true, w_fake = class_weights(g)
    total = 0.0
    for edge in g.edges:
        pred = ttn_forward(edge_raw_features(g, edge), params, scaler)
        total += weighted_bce(pred, edge[2], w_true, w_fake, cfg.eps)
    return total / len(g.edges)


def subgraph_step(
    g: SubGraph, params: TTNParams, scaler: FeatureScaler, cfg: TrainConfig
) -> Tuple[TTNParams, float]:
    """One SGD update from this subgraph; returns (new params, mean loss)."""
    if not g.edges:
        raise DataError("subgraph has no edges")
    w_true, w_fake = class_weights(g)
    loss_sum = 0.0
    grad_sum = np.zeros_like(params.thetas)
    for edge in g.edges:
        raw = edge_raw_features(g, edge)
        pred = ttn_forward(raw, params, scaler)
        loss_sum += weighted_bce(pred, edge[2], w_true, w_fake, cfg.eps)
        dl_dp = _bce_dpred(pred, edge[2], w_true, w_fake, cfg.eps)
        if dl_dp != 0.0:
            grad_sum += dl_dp * ttn_gradient(raw, params, scaler)
    n = len(g.edges)
    new_params = TTNParams(params.thetas - cfg.learning_rate * grad_sum / n)
    return new_params, loss_sum / n


def evaluate_metrics(
    subgraphs: Sequence[SubGraph],
    params: TTNParams,
    scaler: FeatureScaler,
    threshold: float = 0.5,
    shots: Optional[ShotConfig] = None,
) -> Metrics:
    """Confusion counts over all edges; predicted true when pred >= threshold.

    In shot mode each edge gets its own derived seed (shots.seed + edge index)
    so estimates are independent yet reproducible.
    """
    tp = fp = tn = fn = 0
    n_edges = 0
    for g in subgraphs:
        for edge in g.edges:
            edge_shots = (
                ShotConfig(shots.n_shots, shots.seed + n_edges) if shots else None
            )
            n_edges += 1
            pred = ttn_forward(edge_raw_features(g, edge), params, scaler, edge_shots)
            predicted = pred >= threshold
            if edge[2]:
                tp += predicted
                fn += not predicted
            else:
                fp += predicted
                tn += not predicted
    if n_edges == 0:
        raise DataError("no edges to evaluate")
    return Metrics(tp=int(tp), fp=int(fp), tn=int(tn), fn=int(fn))


def train(
    train_set: Sequence[SubGraph],
    test_set: Sequence[SubGraph],
    cfg: TrainConfig,
    initial_params: TTNParams,
    scaler: FeatureScaler,
) -> Tuple[TTNParams, History]:
    """Epoch loop: seeded reshuffle, one subgraph_step per subgraph, then a
    validation pass. Deterministic given (data, config, initial params)."""
    usable = [g for g in train_set if g.edges]
    if not usable:
        raise DataError("training set has no subgraph with edges")
    test_has_edges = any(g.edges for g in test_set)

    rng = np.random.default_rng(cfg.seed)
    params = initial_params.copy()
    history = History()
    update = 0
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(usable))
        epoch_losses = []
        for i in order:
            g = usable[i]
            params, loss = subgraph_step(g, params, scaler, cfg)
            if not math.isfinite(loss) or not np.all(np.isfinite(params.thetas)):
                raise NumericError(
                    f"non-finite loss or parameters at update {update} "
                    f"(subgraph {subgraph_id(g)})"
                )
            history.updates.append(UpdateRecord(update, subgraph_id(g), loss))
            epoch_losses.append(loss)
            update += 1
        metrics = (
            evaluate_metrics(test_set, params, scaler, cfg.threshold)
            if test_has_edges
            else None
        )
        history.epochs.append(
            EpochRecord(epoch, sum(epoch_losses) / len(epoch_losses), metrics)
        )
    return params, history


# --- history serialization ---------------------------------------------------


def _fmt_opt(value: Optional[float]) -> str:
    return "" if value is None else repr(value)


def write_history(history: History, updates_path: str, epochs_path: str) -> None:
    with open(updates_path, "w", encoding="utf-8") as fh:
        fh.write("update,subgraph,loss\n")
        for rec in history.updates:
            fh.write(f"{rec.update},{rec.subgraph},{rec.loss!r}\n")
    with open(epochs_path, "w", encoding="utf-8") as fh:
        fh.write("epoch,train_loss,purity,efficiency,accuracy\n")
        for rec in history.epochs:
            m = rec.metrics
            purity = _fmt_opt(m.purity) if m else ""
            efficiency = _fmt_opt(m.efficiency) if m else ""
            accuracy = _fmt_opt(m.accuracy) if m else ""
            fh.write(
                f"{rec.epoch},{rec.train_loss!r},{purity},{efficiency},{accuracy}\n"
            )
