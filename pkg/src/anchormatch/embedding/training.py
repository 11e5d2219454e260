"""Training-set construction, label grid, pairwise hinge loss and the training loop."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..errors import EmptyTrainingSetError, InfeasibleLabelGridError
from ..features import AnchoredStar, check_k
from ..graph import EdgeType, Graph, classify_edge, normalized_edges
from .gin import GinModel, StarBatch, backward, forward

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    epochs: int = 20
    lr: float = 1e-3
    batch_size: int = 1024
    seed: int = 0
    n: int = 10
    m: int = 3
    layers: int = 2
    epsilon: float = 0.0
    # optional uniform subsample of the training stars (None = use all)
    max_stars: int | None = None

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not self.lr > 0:
            raise ValueError("learning rate must be positive")
        if self.batch_size < 2:
            raise ValueError("batch_size must be >= 2")


@dataclass
class LabelConfig:
    xi: float = 1.0
    low: float = 0.0
    high: float | None = None  # default: low + (g - 1) * xi
    seed: int = 0


@dataclass
class TrainResult:
    model: GinModel
    star_count: int
    epoch_losses: list[float] = field(default_factory=list)


def grid_side(count: int, m: int) -> int:
    """Smallest ``g`` with ``g ** m >= count``."""
    g = max(1, int(round(count ** (1.0 / m))))
    while g**m < count:
        g += 1
    while g > 1 and (g - 1) ** m >= count:
        g -= 1
    return g


def assign_training_labels(
    count: int,
    m: int,
    xi: float = 1.0,
    value_range: tuple[float, float] | None = None,
    seed: int = 0,
) -> np.ndarray:
    """``count`` distinct grid points in ``[a, b]^m``, pairwise at least ``xi`` apart.

    Axis values are ``g = ceil(count ** (1/m))`` evenly spaced points; the
    first ``count`` grid points in row-major order are assigned to rows in a
    seeded random order.
    """
    if count < 1:
        raise InfeasibleLabelGridError("need at least one training star")
    if m < 2:
        raise InfeasibleLabelGridError("label dimension m must be >= 2")
    if not xi > 0:
        raise InfeasibleLabelGridError("xi must be positive")
    g = grid_side(count, m)
    low, high = value_range if value_range is not None else (0.0, (g - 1) * xi)
    if high - low < (g - 1) * xi:
        raise InfeasibleLabelGridError(
            f"range [{low}, {high}] cannot hold {g} values spaced {xi} apart"
        )
    step = (high - low) / (g - 1) if g > 1 else 0.0
    axis = low + step * np.arange(g)
    idx = np.arange(count)
    coords = np.empty((count, m), dtype=np.int64)
    for k in range(m - 1, -1, -1):
        coords[:, k] = idx % g
        idx = idx // g
    labels = axis[coords]
    perm = np.random.default_rng([seed, 0x4C42]).permutation(count)
    return labels[perm]


def _pair_distances(x: np.ndarray) -> np.ndarray:
    n = len(x)
    d2 = np.zeros((n, n))
    diff = np.empty((n, n))
    for k in range(x.shape[1]):
        col = x[:, k]
        np.subtract.outer(col, col, out=diff)
        np.multiply(diff, diff, out=diff)
        d2 += diff
    return np.sqrt(d2, out=d2)


def pairwise_hinge(embeddings: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Sum over unordered pairs of ``max(0, |l_i - l_j| - |o_i - o_j|)`` and its gradient."""
    dist_o = _pair_distances(embeddings)
    gap = _pair_distances(labels)
    gap -= dist_o
    np.maximum(gap, 0.0, out=gap)
    # each unordered pair appears twice in the symmetric matrix; the diagonal is zero
    loss = 0.5 * float(gap.sum())
    # d/do_i of -|o_i - o_j| is -(o_i - o_j)/|o_i - o_j|; taken as zero where they coincide
    usable = (gap > 0.0) & (dist_o > 0.0)
    coef = np.divide(1.0, dist_o, out=np.zeros_like(dist_o), where=usable)
    grad = coef @ embeddings - coef.sum(axis=1)[:, None] * embeddings
    return loss, grad


def compute_loss(
    model: GinModel,
    stars: Sequence[AnchoredStar] | StarBatch,
    labels: np.ndarray,
    features: np.ndarray | None = None,
) -> float:
    batch = stars if isinstance(stars, StarBatch) else StarBatch.from_stars(stars)
    if len(batch) < 2:
        raise ValueError("loss needs at least two stars")
    if features is not None:
        model = GinModel(model.layers, model.final_weight, features, model.anchor_tag, model.seed)
    loss, _ = pairwise_hinge(forward(model, batch), np.asarray(labels, dtype=np.float64))
    return loss


def loss_and_grad(
    model: GinModel, batch: StarBatch, labels: np.ndarray
) -> tuple[float, list[np.ndarray]]:
    out, tr = forward(model, batch, trace=True)
    loss, grad_out = pairwise_hinge(out, labels)
    return loss, backward(model, tr, grad_out)


# ---------------------------------------------------------------------------
# training set
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _subset_bits(r: int) -> np.ndarray:
    codes = np.arange(1 << r, dtype=np.int64)[:, None]
    return ((codes >> np.arange(r)) & 1).astype(bool)


def star_center(g: Graph, e: tuple[int, int], dstar: int) -> tuple[int, int] | None:
    """``(center, anchor)`` of the stars indexed for a normalized edge, or None for dense-dense."""
    kind = classify_edge(g, e, dstar)
    if kind in (EdgeType.SPARSE_SPARSE, EdgeType.SPARSE_DENSE):
        return e[0], e[1]
    if kind is EdgeType.DENSE_SPARSE:
        return e[1], e[0]
    return None


def training_stars(g: Graph, dstar: int, k: int = 1) -> StarBatch:
    """Every anchored star of every star-indexed edge orientation, duplicates included."""
    check_k(k)
    labels = np.asarray(g.labels, dtype=np.int64)
    centers: list[np.ndarray] = []
    anchors: list[np.ndarray] = []
    leaf_blocks: list[np.ndarray] = []
    width = 0
    big = np.iinfo(np.int64).max
    for e in normalized_edges(g):
        ca = star_center(g, e, dstar)
        if ca is None:
            continue
        c, a = ca
        others = labels[[w for w in g.adj[c] if w != a]]
        bits = _subset_bits(len(others))
        leaves = np.sort(np.where(bits, others, big), axis=1)
        leaves[leaves == big] = -1
        centers.append(np.full(len(bits), labels[c]))
        anchors.append(np.full(len(bits), labels[a]))
        leaf_blocks.append(leaves)
        width = max(width, len(others))
    if not centers:
        return StarBatch(
            np.empty(0, np.int64), np.empty(0, np.int64), np.empty((0, 0), np.int64)
        )
    total = sum(len(c) for c in centers)
    leaves_all = np.full((total, width), -1, dtype=np.int64)
    pos = 0
    for block in leaf_blocks:
        leaves_all[pos : pos + len(block), : block.shape[1]] = block
        pos += len(block)
    return StarBatch(np.concatenate(centers), np.concatenate(anchors), leaves_all)


# ---------------------------------------------------------------------------
# optimisation
# ---------------------------------------------------------------------------


class Adam:
    def __init__(self, params: list[np.ndarray], lr: float, b1=0.9, b2=0.999, eps=1e-8):
        self.params = params
        self.lr, self.b1, self.b2, self.eps = lr, b1, b2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads: list[np.ndarray]) -> None:
        self.t += 1
        c1 = 1.0 - self.b1**self.t
        c2 = 1.0 - self.b2**self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def train_model(
    g: Graph,
    dstar: int,
    cfg: TrainConfig | None = None,
    label_cfg: LabelConfig | None = None,
    k: int = 1,
    model: GinModel | None = None,
) -> TrainResult:
    """Train a star GIN on all anchored stars of ``g`` (deterministic given seeds)."""
    cfg = cfg or TrainConfig()
    label_cfg = label_cfg or LabelConfig(seed=cfg.seed)
    stars = training_stars(g, dstar, k)
    if len(stars) == 0:
        raise EmptyTrainingSetError("graph has no edge with an endpoint of degree <= d*")
    rng = np.random.default_rng([cfg.seed, 0x545241])
    if cfg.max_stars is not None and len(stars) > cfg.max_stars:
        stars = stars.take(np.sort(rng.choice(len(stars), cfg.max_stars, replace=False)))
    labels = assign_training_labels(
        len(stars),
        cfg.m,
        label_cfg.xi,
        None if label_cfg.high is None else (label_cfg.low, label_cfg.high),
        label_cfg.seed,
    )
    if model is None:
        model = GinModel.initialize(
            max(g.sigma_size, 1), cfg.n, cfg.m, cfg.layers, cfg.seed, cfg.epsilon
        )
    opt = Adam(model.parameters(), cfg.lr)
    result = TrainResult(model, len(stars))
    count = len(stars)
    for epoch in range(cfg.epochs):
        order = rng.permutation(count)
        total = 0.0
        for start in range(0, count, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            if len(idx) < 2:
                continue
            loss, grads = loss_and_grad(model, stars.take(idx), labels[idx])
            opt.step(grads)
            total += loss
        result.epoch_losses.append(total)
        log.info("epoch %d/%d loss %.4g", epoch + 1, cfg.epochs, total)
    model.touch()
    return result
