"""Brute-force ground truth for matches and star isomorphism.

Nothing here touches the index, the planner or the engine: adjacency is
checked against locally built edge sets so a bug in ``Graph.has_edge`` or in
growth cannot mask itself.
"""

from __future__ import annotations

import itertools

from .errors import OracleBoundError
from .features import AnchoredStar
from .graph import Graph

DEFAULT_BOUND = 10

Binding = tuple[int, ...]


def _edge_set(g: Graph) -> set[tuple[int, int]]:
    return {(u, v) for u in range(g.vertex_count) for v in g.adj[u]}


def brute_force_matches(q: Graph, g: Graph, bound: int = DEFAULT_BOUND) -> set[Binding]:
    """Every injective label- and edge-preserving map ``V(Q) -> V(G)``.

    Plain backtracking in query-id order over label-compatible data vertices.
    """
    n = q.vertex_count
    if n > bound:
        raise OracleBoundError(f"query has {n} vertices; oracle bound is {bound}")
    if n == 0:
        return set()
    g_edges = _edge_set(g)
    by_label: dict[int, list[int]] = {}
    for v, lab in enumerate(g.labels):
        by_label.setdefault(lab, []).append(v)
    # query neighbors with smaller id, checked when the larger endpoint is placed
    back = [[w for w in q.adj[x] if w < x] for x in range(n)]
    out: set[Binding] = set()
    binding = [-1] * n

    def place(x: int) -> None:
        if x == n:
            out.add(tuple(binding))
            return
        for v in by_label.get(q.labels[x], ()):
            if v in binding[:x]:
                continue
            if all((binding[w], v) in g_edges for w in back[x]):
                binding[x] = v
                place(x + 1)
                binding[x] = -1

    place(0)
    return out


def permutation_matches(q: Graph, g: Graph, bound: int = 6) -> set[Binding]:
    """Second oracle: test every injective map from ``V(Q)`` into ``V(G)``."""
    if q.vertex_count > bound:
        raise OracleBoundError(f"query has {q.vertex_count} vertices; bound is {bound}")
    g_edges = _edge_set(g)
    q_edges = [(a, b) for a in range(q.vertex_count) for b in q.adj[a] if a < b]
    out = set()
    for image in itertools.permutations(range(g.vertex_count), q.vertex_count):
        if any(q.labels[x] != g.labels[image[x]] for x in range(q.vertex_count)):
            continue
        if all((image[a], image[b]) in g_edges for a, b in q_edges):
            out.add(image)
    return out


def is_match(q: Graph, g: Graph, binding: Binding) -> bool:
    """Both matching conditions checked literally for one binding."""
    if len(binding) != q.vertex_count or len(set(binding)) != len(binding):
        return False
    if any(q.labels[x] != g.labels[binding[x]] for x in range(q.vertex_count)):
        return False
    g_edges = _edge_set(g)
    return all((binding[a], binding[b]) in g_edges for a in range(q.vertex_count) for b in q.adj[a])


def star_isomorphic(a: AnchoredStar, b: AnchoredStar) -> bool:
    return a.canonical == b.canonical


def star_graph(star: AnchoredStar) -> tuple[list[int], list[tuple[int, int]]]:
    """Vertex labels and edges of a star: 0 is the center, 1 the anchor end, then leaves."""
    labels = [star.center_label, star.anchor_label, *star.leaf_labels]
    return labels, [(0, i) for i in range(1, len(labels))]


def anchored_isomorphic_by_search(a: AnchoredStar, b: AnchoredStar) -> bool:
    """Generic bijection search; the anchor endpoint must map to the anchor endpoint."""
    la, ea = star_graph(a)
    lb, eb = star_graph(b)
    if len(la) != len(lb):
        return False
    eb_set = {frozenset(e) for e in eb}
    n = len(la)
    for perm in itertools.permutations(range(n)):
        if perm[0] != 0 or perm[1] != 1:
            continue
        if any(la[i] != lb[perm[i]] for i in range(n)):
            continue
        if all(frozenset((perm[x], perm[y])) in eb_set for x, y in ea):
            return True
    return False
