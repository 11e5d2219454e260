"""Seeded synthetic data graphs and random-walk query extraction.

The constructions are written out here rather than imported so the output
for a given seed does not drift with a third-party library version. All
randomness comes from :class:`random.Random`, whose stream is stable across
Python releases.
"""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass

from ..errors import GeneratorError, QueryTooSmallError
from ..graph import Graph

MODELS = ("random-regular", "nws", "ba")


@dataclass
class GenSpec:
    model: str
    vertex_count: int
    avg_deg: float = 5.0
    sigma_size: int = 100
    seed: int = 0
    # model parameters; derived from avg_deg when left as None
    degree: int | None = None  # random-regular r
    ring_k: int | None = None  # nws ring neighbors (even)
    shortcut_p: float | None = None  # nws shortcut probability
    attach: int | None = None  # ba edges per new vertex


@dataclass
class QueryGenSpec:
    size: int
    count: int = 1
    seed: int = 0
    category: str = "any"  # "dense", "sparse" or "any"

    def __post_init__(self) -> None:
        if self.size < 2:
            raise ValueError("query size must be >= 2")
        if self.category not in ("dense", "sparse", "any"):
            raise ValueError(f"unknown query category {self.category!r}")


def generate_graph(spec: GenSpec) -> Graph:
    rng = random.Random(spec.seed)
    n = spec.vertex_count
    if n < 1:
        raise GeneratorError("vertex_count must be >= 1")
    if spec.sigma_size < 1:
        raise GeneratorError("sigma_size must be >= 1")
    if spec.model == "random-regular":
        r = spec.degree if spec.degree is not None else int(round(spec.avg_deg))
        edges = random_regular_edges(r, n, rng)
    elif spec.model == "nws":
        k = spec.ring_k if spec.ring_k is not None else 2 * int(spec.avg_deg // 2)
        if spec.shortcut_p is not None:
            p = spec.shortcut_p
        else:
            p = (spec.avg_deg - k) / k if k else 0.0
        edges = newman_watts_strogatz_edges(n, k, p, rng)
    elif spec.model == "ba":
        m = spec.attach if spec.attach is not None else max(1, int(round(spec.avg_deg / 2)))
        edges = barabasi_albert_edges(n, m, rng)
    else:
        raise GeneratorError(f"unknown generator model {spec.model!r}; choose from {MODELS}")
    labels = [rng.randrange(spec.sigma_size) for _ in range(n)]
    return Graph.from_edges(labels, edges, spec.sigma_size)


def random_regular_edges(r: int, n: int, rng: random.Random) -> list[tuple[int, int]]:
    """Uniform-ish random ``r``-regular graph by repeated stub pairing.

    Stubs are shuffled and paired; pairs that would form a loop or a repeated
    edge go back into the pool and are reshuffled. A round in which no
    admissible pair remains among the leftover stubs restarts from scratch.
    """
    if r < 0 or r >= n or (r * n) % 2:
        raise GeneratorError(f"no simple {r}-regular graph on {n} vertices")
    if r == 0:
        return []
    for _ in range(1000):
        edges = _pair_stubs(r, n, rng)
        if edges is not None:
            return sorted(edges)
    raise GeneratorError("failed to build a random regular graph")


def _pair_stubs(r: int, n: int, rng: random.Random) -> set[tuple[int, int]] | None:
    edges: set[tuple[int, int]] = set()
    stubs = [v for v in range(n) for _ in range(r)]
    while stubs:
        leftover: dict[int, int] = defaultdict(int)
        rng.shuffle(stubs)
        it = iter(stubs)
        for a, b in zip(it, it):
            if a > b:
                a, b = b, a
            if a != b and (a, b) not in edges:
                edges.add((a, b))
            else:
                leftover[a] += 1
                leftover[b] += 1
        if not leftover:
            return edges
        pool = sorted(leftover)
        if not any(
            (x, y) not in edges for i, x in enumerate(pool) for y in pool[i + 1 :]
        ):
            return None
        stubs = [v for v in pool for _ in range(leftover[v])]
    return edges


def newman_watts_strogatz_edges(
    n: int, k: int, p: float, rng: random.Random
) -> list[tuple[int, int]]:
    """Ring lattice with ``k`` nearest neighbors plus random shortcuts.

    For every lattice edge ``(u, u + j)`` a shortcut ``(u, w)`` to a uniform
    random non-neighbor ``w`` is added with probability ``p``; lattice edges
    are never removed.
    """
    if k % 2 or k < 0 or k >= n:
        raise GeneratorError(f"ring_k must be even and < |V| (got {k})")
    if not 0.0 <= p <= 1.0:
        raise GeneratorError(f"shortcut probability {p} outside [0, 1]")
    adj: list[set[int]] = [set() for _ in range(n)]
    for u in range(n):
        for j in range(1, k // 2 + 1):
            w = (u + j) % n
            adj[u].add(w)
            adj[w].add(u)
    for u in range(n):
        for _ in range(k // 2):
            if rng.random() < p:
                if len(adj[u]) >= n - 1:
                    continue
                w = rng.randrange(n)
                while w == u or w in adj[u]:
                    w = rng.randrange(n)
                adj[u].add(w)
                adj[w].add(u)
    return sorted((u, w) for u in range(n) for w in adj[u] if u < w)


def barabasi_albert_edges(n: int, m: int, rng: random.Random) -> list[tuple[int, int]]:
    """Preferential attachment seeded with the clique on ``m + 1`` vertices.

    Each later vertex links to ``m`` distinct earlier vertices chosen with
    probability proportional to degree, giving
    ``m (m + 1) / 2 + m (n - m - 1)`` edges.
    """
    if m < 1 or m >= n:
        raise GeneratorError(f"attachment count must satisfy 1 <= m < |V| (got m={m})")
    edges = [(u, w) for u in range(m + 1) for w in range(u + 1, m + 1)]
    repeated = [v for e in edges for v in e]
    for v in range(m + 1, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(rng.choice(repeated))
        for t in sorted(targets):
            edges.append((t, v))
            repeated += (t, v)
    return edges


# ---------------------------------------------------------------------------
# queries
# ---------------------------------------------------------------------------


def _component_sizes(g: Graph) -> list[int]:
    comp = [-1] * g.vertex_count
    sizes = []
    for s in range(g.vertex_count):
        if comp[s] >= 0:
            continue
        cid = len(sizes)
        comp[s] = cid
        stack, size = [s], 0
        while stack:
            v = stack.pop()
            size += 1
            for w in g.adj[v]:
                if comp[w] < 0:
                    comp[w] = cid
                    stack.append(w)
        sizes.append(size)
    return sizes


def random_walk_query(g: Graph, size: int, rng: random.Random, max_steps: int | None = None) -> Graph | None:
    """Induced subgraph on the first ``size`` distinct vertices of a random walk."""
    starts = [v for v in range(g.vertex_count) if g.adj[v]]
    if not starts:
        return None
    v = rng.choice(starts)
    seen = [v]
    seen_set = {v}
    for _ in range(max_steps if max_steps is not None else 100 * size):
        if len(seen) == size:
            break
        v = rng.choice(g.adj[v])
        if v not in seen_set:
            seen_set.add(v)
            seen.append(v)
    if len(seen) < size:
        return None
    return g.induced_subgraph(seen)


def query_category(q: Graph) -> str:
    return "dense" if 2 * q.edge_count / q.vertex_count > 3 else "sparse"


def generate_queries(g: Graph, spec: QueryGenSpec, max_attempts: int = 10_000) -> list[Graph]:
    """``spec.count`` connected random-walk queries of ``spec.size`` vertices.

    The dense/sparse category filter is applied only for sizes above 4.
    """
    if not any(s >= spec.size for s in _component_sizes(g)):
        raise QueryTooSmallError(f"no connected component has {spec.size} vertices")
    rng = random.Random(spec.seed)
    out: list[Graph] = []
    attempts = 0
    while len(out) < spec.count:
        attempts += 1
        if attempts > max_attempts:
            raise GeneratorError(
                f"could not produce {spec.count} {spec.category} queries of size {spec.size}"
            )
        q = random_walk_query(g, spec.size, rng)
        if q is None:
            continue
        if spec.category != "any" and spec.size > 4 and query_category(q) != spec.category:
            continue
        out.append(q)
    return out
