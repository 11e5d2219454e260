"""Hashable embedding keys and the embedding backends that produce them."""

from __future__ import annotations

import hashlib
import math
import struct
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from ..features import AnchoredStar
from .gin import GinModel, embed_triples

KEY_SCALE = 1_000_000
WL_DIGEST = "0" * 64

Triple = tuple[int, int, tuple[int, ...]]


@dataclass(frozen=True)
class EmbeddingKey:
    values: tuple[int, ...]
    backend: str  # "gin" or "wl"
    model_digest: str


def quantize(vec: Sequence[float] | np.ndarray) -> tuple[int, ...]:
    """``round(x * 1e6)`` per component, halves rounded away from zero."""
    out = []
    for x in vec:
        x = float(x)
        if not math.isfinite(x):
            raise ValueError(f"non-finite embedding component {x!r}")
        out.append(int(math.copysign(math.floor(abs(x) * KEY_SCALE + 0.5), x)))
    return tuple(out)


def quantize_rows(vectors: np.ndarray) -> np.ndarray:
    if not np.isfinite(vectors).all():
        raise ValueError("non-finite embedding component")
    return (np.sign(vectors) * np.floor(np.abs(vectors) * KEY_SCALE + 0.5)).astype(np.int64)


def embedding_key(vec: Sequence[float] | np.ndarray, model: GinModel) -> EmbeddingKey:
    return EmbeddingKey(quantize(vec), "gin", model.digest())


def wl_values(triple: Triple) -> tuple[int, int]:
    center, anchor, leaves = triple
    text = f"{center}|{anchor}|{','.join(map(str, sorted(leaves)))}".encode()
    return struct.unpack("<qq", hashlib.blake2b(text, digest_size=16).digest())


def wl_hash_key(star: AnchoredStar) -> EmbeddingKey:
    return EmbeddingKey(wl_values(star.canonical), "wl", WL_DIGEST)


class StarEmbedder:
    """Maps stars to key values; both index build and queries go through this."""

    backend: str = ""

    @property
    def digest(self) -> str:
        raise NotImplementedError

    def values_for(self, triples: Sequence[Triple]) -> list[tuple[int, ...]]:
        raise NotImplementedError

    def key(self, star: AnchoredStar) -> EmbeddingKey:
        return EmbeddingKey(self.values_for([star.canonical])[0], self.backend, self.digest)

    def keys(self, stars: Iterable[AnchoredStar]) -> list[EmbeddingKey]:
        vals = self.values_for([s.canonical for s in stars])
        return [EmbeddingKey(v, self.backend, self.digest) for v in vals]


class WLEmbedder(StarEmbedder):
    backend = "wl"

    @property
    def digest(self) -> str:
        return WL_DIGEST

    def values_for(self, triples: Sequence[Triple]) -> list[tuple[int, ...]]:
        return [wl_values(t) for t in triples]


class GinEmbedder(StarEmbedder):
    """GIN-backed keys with a per-triple cache (isomorphic stars share a triple)."""

    backend = "gin"

    def __init__(self, model: GinModel):
        self.model = model
        self._digest = model.digest()
        self._cache: dict[Triple, tuple[int, ...]] = {}

    @property
    def digest(self) -> str:
        return self._digest

    def values_for(self, triples: Sequence[Triple]) -> list[tuple[int, ...]]:
        cache = self._cache
        missing = list({t for t in triples if t not in cache})
        if missing:
            rows = quantize_rows(embed_triples(self.model, missing))
            for t, row in zip(missing, rows.tolist()):
                cache[t] = tuple(row)
        return [cache[t] for t in triples]


def make_embedder(backend: str, model: GinModel | None = None) -> StarEmbedder:
    if backend == "wl":
        return WLEmbedder()
    if backend in ("gin", "gin-trained", "gin-untrained"):
        if model is None:
            raise ValueError(f"backend {backend!r} needs a model")
        return GinEmbedder(model)
    raise ValueError(f"unknown backend {backend!r}")
