"""Embedding-conflict measurement: non-isomorphic stars that share a key."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from ..features import AnchoredStar
from .gin import StarBatch
from .keys import StarEmbedder


def conflict_ratio(
    embedder: StarEmbedder, pairs: Sequence[tuple[AnchoredStar, AnchoredStar]]
) -> float:
    """Fraction of non-isomorphic pairs whose keys coincide (isomorphic pairs are skipped)."""
    kept = [(a, b) for a, b in pairs if a.canonical != b.canonical]
    if not kept:
        return 0.0
    keys = embedder.values_for([s.canonical for pair in kept for s in pair])
    hits = sum(keys[2 * i] == keys[2 * i + 1] for i in range(len(kept)))
    return hits / len(kept)


def batch_triples(batch: StarBatch) -> tuple[list[tuple[int, int, tuple[int, ...]]], np.ndarray]:
    """Distinct canonical triples of a batch and each row's index into them."""
    rows = np.column_stack([batch.center, batch.anchor, batch.leaves])
    uniq, inverse = np.unique(rows, axis=0, return_inverse=True)
    triples = [
        (int(r[0]), int(r[1]), tuple(int(x) for x in r[2:] if x >= 0)) for r in uniq.tolist()
    ]
    return triples, inverse.reshape(-1)


def sampled_conflict_ratio(
    embedder: StarEmbedder, batch: StarBatch, pair_count: int, seed: int = 0
) -> tuple[float, int]:
    """Conflict ratio over ``pair_count`` random non-isomorphic pairs drawn from ``batch``.

    Pairs whose stars are isomorphic (equal canonical triples) are redrawn, so
    the denominator is exactly ``pair_count``. Returns ``(ratio, conflicts)``.
    """
    triples, tid = batch_triples(batch)
    if len(triples) < 2:
        raise ValueError("need at least two non-isomorphic stars")
    values = embedder.values_for(triples)
    _, kid = np.unique(np.asarray(values, dtype=np.int64), axis=0, return_inverse=True)
    kid = kid.reshape(-1)
    rng = np.random.default_rng([seed, 0x434F4E])
    n = len(tid)
    conflicts = 0
    drawn = 0
    while drawn < pair_count:
        want = pair_count - drawn
        i = rng.integers(0, n, size=want + want // 4 + 16)
        j = rng.integers(0, n, size=len(i))
        ti, tj = tid[i], tid[j]
        ok = ti != tj
        i, j = i[ok][:want], j[ok][:want]
        conflicts += int((kid[tid[i]] == kid[tid[j]]).sum())
        drawn += len(i)
    return conflicts / pair_count, conflicts
