"""A small Graph Isomorphism Network specialised to anchored stars.

Every arithmetic step is elementwise and every neighbor/readout sum adds its
addends one at a time in a canonical (value-sorted) order. The output for a
star therefore does not depend on leaf order, batch size or batch position,
bit for bit. Matrix-vector products are spelled out as ``n`` elementwise
multiply-adds for the same reason; BLAS may change reduction order by shape.
"""

from __future__ import annotations

import hashlib
import struct
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DigestMismatchError, FormatError, LabelOutOfRangeError
from ..features import AnchoredStar

MODEL_MAGIC = b"GAE-GIN1"
_MODEL_VERSION = 1


def init_label_features(sigma_size: int, n: int, seed: int) -> np.ndarray:
    """Deterministic label encoding: one standard-normal ``n``-vector per label."""
    if sigma_size < 1 or n < 1:
        raise ValueError("sigma_size and n must be >= 1")
    rng = np.random.default_rng([seed, 0x4C41424C])
    table = rng.standard_normal((sigma_size, n))
    # distinct rows with probability one; guard anyway so the contract is unconditional
    while len({row.tobytes() for row in table}) < sigma_size:
        table = rng.standard_normal((sigma_size, n))
    return table


@dataclass
class GinLayer:
    weight: np.ndarray  # (n, n)
    bias: np.ndarray  # (n,)
    epsilon: float = 0.0


@dataclass
class GinModel:
    """Weights of a star GIN: ``layers`` MLP blocks, sum readout, final ``m x n`` map.

    ``features`` is the fixed label encoding and ``anchor_tag`` a fixed vector
    added to the anchor vertex's input so the anchor is distinguishable from
    the leaves. Neither is trained.
    """

    layers: list[GinLayer]
    final_weight: np.ndarray  # (m, n)
    features: np.ndarray  # (|Σ|, n)
    anchor_tag: np.ndarray  # (n,)
    seed: int = 0
    _digest: str | None = field(default=None, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.features.shape[1]

    @property
    def m(self) -> int:
        return self.final_weight.shape[0]

    @property
    def sigma_size(self) -> int:
        return self.features.shape[0]

    @classmethod
    def initialize(
        cls,
        sigma_size: int,
        n: int = 10,
        m: int = 3,
        layer_count: int = 2,
        seed: int = 0,
        epsilon: float = 0.0,
    ) -> GinModel:
        rng = np.random.default_rng([seed, 0x47494E])
        scale = np.sqrt(2.0 / n)
        layers = [
            GinLayer(rng.normal(0.0, scale, (n, n)), rng.normal(0.0, 0.1, n), float(epsilon))
            for _ in range(layer_count)
        ]
        final = rng.normal(0.0, np.sqrt(1.0 / n), (m, n))
        tag = rng.standard_normal(n)
        return cls(layers, final, init_label_features(sigma_size, n, seed), tag, seed)

    def parameters(self) -> list[np.ndarray]:
        """Trainable arrays, in a fixed order (weights and biases, then final)."""
        out: list[np.ndarray] = []
        for layer in self.layers:
            out += [layer.weight, layer.bias]
        out.append(self.final_weight)
        return out

    def touch(self) -> None:
        """Invalidate the cached digest after weights were modified in place."""
        self._digest = None

    def digest(self) -> str:
        if self._digest is None:
            self._digest = hashlib.sha256(_payload(self)).hexdigest()
        return self._digest

    def copy(self) -> GinModel:
        return GinModel(
            [GinLayer(la.weight.copy(), la.bias.copy(), la.epsilon) for la in self.layers],
            self.final_weight.copy(),
            self.features.copy(),
            self.anchor_tag.copy(),
            self.seed,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GinModel):
            return NotImplemented
        return _payload(self) == _payload(other)


# ---------------------------------------------------------------------------
# batched star representation
# ---------------------------------------------------------------------------


@dataclass
class StarBatch:
    """Stars as padded label arrays; ``leaves`` is ``-1`` beyond each star's size."""

    center: np.ndarray  # (B,)
    anchor: np.ndarray  # (B,)
    leaves: np.ndarray  # (B, L)

    def __len__(self) -> int:
        return len(self.center)

    @classmethod
    def from_stars(cls, stars: Sequence[AnchoredStar]) -> StarBatch:
        return cls.from_triples([s.canonical for s in stars])

    @classmethod
    def from_triples(cls, triples: Sequence[tuple[int, int, tuple[int, ...]]]) -> StarBatch:
        b = len(triples)
        width = max((len(t[2]) for t in triples), default=0)
        leaves = np.full((b, width), -1, dtype=np.int64)
        for i, (_, _, lv) in enumerate(triples):
            leaves[i, : len(lv)] = lv
        center = np.fromiter((t[0] for t in triples), dtype=np.int64, count=b)
        anchor = np.fromiter((t[1] for t in triples), dtype=np.int64, count=b)
        return cls(center, anchor, leaves)

    def take(self, idx: np.ndarray) -> StarBatch:
        leaves = self.leaves[idx]
        if leaves.shape[1]:
            width = int((leaves >= 0).sum(axis=1).max(initial=0))
            leaves = leaves[:, :width]
        return StarBatch(self.center[idx], self.anchor[idx], leaves)


def _matvec(weight: np.ndarray, bias: np.ndarray | None, x: np.ndarray) -> np.ndarray:
    out = np.zeros(x.shape[:-1] + (weight.shape[0],))
    if bias is not None:
        out += bias
    for j in range(weight.shape[1]):
        out += x[..., j, None] * weight[:, j]
    return out


def canonical_sum(vectors: np.ndarray, valid: np.ndarray) -> np.ndarray:
    """Sum each row's valid vectors in lexicographic order of their components.

    ``vectors`` is ``(B, S, n)``; invalid slots must hold zeros. They are
    ordered last, where adding ``+0.0`` leaves the running sum unchanged.
    """
    b, s, n = vectors.shape
    if s == 0:
        return np.zeros((b, n))
    if s > 1:
        flat = vectors.reshape(b * s, n)
        keys = [flat[:, j] for j in range(n - 1, -1, -1)]
        keys.append((~valid).reshape(-1))
        keys.append(np.repeat(np.arange(b), s))
        order = np.lexsort(keys)
        vectors = flat[order].reshape(b, s, n)
    acc = vectors[:, 0].copy()
    for k in range(1, s):
        acc = acc + vectors[:, k]
    return acc


def _relu(a: np.ndarray) -> np.ndarray:
    return np.where(a > 0.0, a, 0.0)


@dataclass
class _Trace:
    valid: np.ndarray
    inputs: list[np.ndarray]  # per layer: combined input Z
    pre: list[np.ndarray]  # per layer: pre-activation
    readout: np.ndarray


def _initial_states(model: GinModel, batch: StarBatch) -> tuple[np.ndarray, np.ndarray]:
    sigma = model.sigma_size
    for arr in (batch.center, batch.anchor, batch.leaves[batch.leaves >= 0]):
        if arr.size and (arr.min() < 0 or arr.max() >= sigma):
            raise LabelOutOfRangeError(f"star label outside feature table of size {sigma}")
    b, width = batch.leaves.shape
    feats = model.features
    h = np.zeros((b, width + 2, model.n))
    h[:, 0] = feats[batch.center]
    h[:, 1] = feats[batch.anchor] + model.anchor_tag
    valid = np.ones((b, width + 2), dtype=bool)
    if width:
        leaf_valid = batch.leaves >= 0
        valid[:, 2:] = leaf_valid
        h[:, 2:][leaf_valid] = feats[batch.leaves[leaf_valid]]
    return h, valid


def forward(model: GinModel, batch: StarBatch, trace: bool = False):
    """Embeddings ``(B, m)`` for a batch; with ``trace`` also the backward cache."""
    h, valid = _initial_states(model, batch)
    inputs: list[np.ndarray] = []
    pres: list[np.ndarray] = []
    invalid = ~valid
    for layer in model.layers:
        neighbor_sum = canonical_sum(h[:, 1:], valid[:, 1:])
        z = (1.0 + layer.epsilon) * h
        z[:, 0] += neighbor_sum
        z[:, 1:] += h[:, 0:1]
        z[invalid] = 0.0
        a = _matvec(layer.weight, layer.bias, z)
        h = _relu(a)
        h[invalid] = 0.0
        if trace:
            inputs.append(z)
            pres.append(a)
    readout = canonical_sum(h, valid)
    out = _matvec(model.final_weight, None, readout)
    if trace:
        return out, _Trace(valid, inputs, pres, readout)
    return out


def backward(model: GinModel, tr: _Trace, grad_out: np.ndarray) -> list[np.ndarray]:
    """Gradients for ``model.parameters()`` given ``dLoss/d(output)``."""
    valid = tr.valid
    mask = valid[..., None]
    grad_final = grad_out.T @ tr.readout
    d_readout = grad_out @ model.final_weight
    dh = np.broadcast_to(d_readout[:, None, :], tr.inputs[-1].shape if tr.inputs else (0,)) * mask
    grads: list[np.ndarray] = []
    for t in range(len(model.layers) - 1, -1, -1):
        layer = model.layers[t]
        da = dh * (tr.pre[t] > 0.0) * mask
        z = tr.inputs[t]
        flat_da = da.reshape(-1, da.shape[-1])
        grad_w = flat_da.T @ z.reshape(-1, z.shape[-1])
        grad_b = flat_da.sum(axis=0)
        grads = [grad_w, grad_b] + grads
        if t == 0:
            break
        dz = (da @ layer.weight) * mask
        dh = (1.0 + layer.epsilon) * dz
        dh[:, 0] += dz[:, 1:].sum(axis=1)
        dh[:, 1:] += dz[:, 0:1]
        dh *= mask
    grads.append(grad_final)
    return grads


def gin_forward(
    model: GinModel, star: AnchoredStar, features: np.ndarray | None = None
) -> np.ndarray:
    """Embedding vector of a single star; ``features`` overrides the model's table."""
    if features is not None and features is not model.features:
        model = GinModel(model.layers, model.final_weight, features, model.anchor_tag, model.seed)
    return forward(model, StarBatch.from_stars([star]))[0]


def embed_triples(
    model: GinModel, triples: Sequence[tuple[int, int, tuple[int, ...]]], chunk: int = 4096
) -> np.ndarray:
    out = np.empty((len(triples), model.m))
    for start in range(0, len(triples), chunk):
        part = triples[start : start + chunk]
        out[start : start + len(part)] = forward(model, StarBatch.from_triples(part))
    return out


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------


def _payload(model: GinModel) -> bytes:
    parts = [
        struct.pack(
            "<IIIIq", len(model.layers), model.n, model.m, model.sigma_size, model.seed
        )
    ]
    for layer in model.layers:
        parts.append(struct.pack("<d", layer.epsilon))
        parts.append(np.ascontiguousarray(layer.weight, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(layer.bias, dtype="<f8").tobytes())
    parts.append(np.ascontiguousarray(model.final_weight, dtype="<f8").tobytes())
    parts.append(np.ascontiguousarray(model.features, dtype="<f8").tobytes())
    parts.append(np.ascontiguousarray(model.anchor_tag, dtype="<f8").tobytes())
    return b"".join(parts)


def save_model(model: GinModel, path: str | Path) -> None:
    payload = _payload(model)
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<I", _MODEL_VERSION))
        fh.write(payload)
        fh.write(hashlib.sha256(payload).digest())


def load_model(path: str | Path) -> GinModel:
    data = Path(path).read_bytes()
    if data[:8] != MODEL_MAGIC:
        raise FormatError(f"{path}: not a model file (bad magic)")
    if len(data) < 12 + 24 + 32:
        raise FormatError(f"{path}: truncated model file")
    (version,) = struct.unpack_from("<I", data, 8)
    if version != _MODEL_VERSION:
        raise FormatError(f"{path}: unsupported model version {version}")
    layer_count, n, m, sigma, seed = struct.unpack_from("<IIIIq", data, 12)
    need = 24 + layer_count * 8 * (1 + n * n + n) + 8 * (m * n + sigma * n + n)
    payload = data[12 : 12 + need]
    digest = data[12 + need :]
    if len(payload) != need or len(digest) != 32:
        raise FormatError(f"{path}: truncated model file")
    if hashlib.sha256(payload).digest() != digest:
        raise DigestMismatchError(f"{path}: model digest does not match its weights")
    pos = 24

    def take(count: int, shape: tuple[int, ...]) -> np.ndarray:
        nonlocal pos
        arr = np.frombuffer(payload, dtype="<f8", count=count, offset=pos).astype(np.float64)
        pos += 8 * count
        return arr.reshape(shape)

    layers = []
    for _ in range(layer_count):
        (eps,) = struct.unpack_from("<d", payload, pos)
        pos += 8
        w = take(n * n, (n, n))
        b = take(n, (n,))
        layers.append(GinLayer(w, b, eps))
    final = take(m * n, (m, n))
    feats = take(sigma * n, (sigma, n))
    tag = take(n, (n,))
    return GinModel(layers, final, feats, tag, seed)
