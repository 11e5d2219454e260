"""Anchored 1-radius stars and anchored 1-radius paths around an edge.

A star for the oriented edge ``(u, v)`` is the anchor edge plus a subset of
``u``'s other incident edges. Stars have a trivial canonical form: the triple
``(center label, anchor label, sorted leaf labels)``.
"""

from __future__ import annotations

import itertools
from collections import Counter
from collections.abc import Iterator
from dataclasses import dataclass, field
from math import comb

from .errors import NotAnEdgeError, UnsupportedParameterError
from .graph import Graph, OrientedEdge

PathCode = tuple[int, ...]


@dataclass(frozen=True)
class AnchoredStar:
    center_label: int
    anchor_label: int
    leaf_labels: tuple[int, ...]
    # data-side realization: (center, anchor, *leaves); excluded from equality
    members: tuple[int, ...] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        leaves = tuple(sorted(self.leaf_labels))
        if leaves != self.leaf_labels:
            object.__setattr__(self, "leaf_labels", leaves)

    @property
    def canonical(self) -> tuple[int, int, tuple[int, ...]]:
        return (self.center_label, self.anchor_label, self.leaf_labels)

    @property
    def size(self) -> int:
        """Number of edges in the star."""
        return 1 + len(self.leaf_labels)


def check_k(k: int) -> None:
    if k != 1:
        raise UnsupportedParameterError(f"anchored features are implemented for k=1 only (got k={k})")


def _require_edge(g: Graph, e: OrientedEdge) -> tuple[int, int]:
    u, v = e
    if not g.has_edge(u, v):
        raise NotAnEdgeError(f"({u}, {v}) is not an edge")
    return u, v


def iter_anchored_stars(g: Graph, e: OrientedEdge, k: int = 1) -> Iterator[AnchoredStar]:
    """Stream every star of ``e``: one per subset of the center's other edges."""
    check_k(k)
    u, v = _require_edge(g, e)
    labels = g.labels
    others = [w for w in g.adj[u] if w != v]
    cu, cv = labels[u], labels[v]
    for r in range(len(others) + 1):
        for subset in itertools.combinations(others, r):
            yield AnchoredStar(
                cu, cv, tuple(sorted(labels[w] for w in subset)), members=(u, v, *subset)
            )


def enumerate_anchored_stars(g: Graph, e: OrientedEdge, k: int = 1) -> list[AnchoredStar]:
    return list(iter_anchored_stars(g, e, k))


def iter_star_shapes(g: Graph, e: OrientedEdge, k: int = 1) -> Iterator[tuple[AnchoredStar, int]]:
    """Distinct stars of ``e`` up to isomorphism, each with its multiplicity.

    Enumerates sub-multisets of the non-anchor neighbor labels. The
    multiplicities sum to ``2 ** (d(u) - 1)``.
    """
    check_k(k)
    u, v = _require_edge(g, e)
    labels = g.labels
    counts = sorted(Counter(labels[w] for w in g.adj[u] if w != v).items())
    cu, cv = labels[u], labels[v]
    ranges = [range(c + 1) for _, c in counts]
    for picks in itertools.product(*ranges):
        leaves: list[int] = []
        mult = 1
        for (lab, c), p in zip(counts, picks):
            leaves.extend([lab] * p)
            mult *= comb(c, p)
        yield AnchoredStar(cu, cv, tuple(leaves)), mult


def max_anchored_star(g: Graph, e: OrientedEdge, k: int = 1) -> AnchoredStar:
    check_k(k)
    u, v = _require_edge(g, e)
    others = tuple(w for w in g.adj[u] if w != v)
    labels = g.labels
    return AnchoredStar(
        labels[u], labels[v], tuple(sorted(labels[w] for w in others)), members=(u, v, *others)
    )


def enumerate_anchored_paths(g: Graph, e: OrientedEdge, k: int = 1) -> list[PathCode]:
    """All ``d(u)`` anchored path codes of ``e`` (a multiset, duplicates kept)."""
    check_k(k)
    u, v = _require_edge(g, e)
    labels = g.labels
    cu, cv = labels[u], labels[v]
    codes: list[PathCode] = [(cu, cv)]
    codes.extend((labels[w], cu, cv) for w in g.adj[u] if w != v)
    return codes


def max_anchored_paths(g: Graph, e: OrientedEdge, k: int = 1) -> list[PathCode]:
    """Codes of the longest anchored paths: 3-tuples, or the bare 2-tuple if ``d(u) = 1``."""
    check_k(k)
    u, v = _require_edge(g, e)
    labels = g.labels
    cu, cv = labels[u], labels[v]
    longest = [(labels[w], cu, cv) for w in g.adj[u] if w != v]
    return longest if longest else [(cu, cv)]
