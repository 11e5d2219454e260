"""Cost-model DFS query plans.

A plan fixes the order in which query edges are matched: a depth-first
traversal whose edges drive candidate joins, plus existence checks for the
remaining (non-DFS) edges at the step where their later endpoint is placed.
"""

from __future__ import annotations

import random
from collections.abc import Sequence
from dataclasses import dataclass, field

from .errors import DisconnectedQueryError, NotAnEdgeError, UnsupportedParameterError
from .graph import Graph, OrientedEdge

COST_KINDS = ("deg", "lf")
START_KINDS = ("maxdeg", "minlf", "rand")


@dataclass(frozen=True)
class CostStrategy:
    kind: str = "deg"
    # global label counts of the data graph; required for "lf"
    label_counts: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in COST_KINDS:
            raise UnsupportedParameterError(f"unknown cost strategy {self.kind!r}")


@dataclass(frozen=True)
class StartStrategy:
    kind: str = "maxdeg"
    K: int | None = None  # None: min(3, |V(Q)|)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in START_KINDS:
            raise UnsupportedParameterError(f"unknown start strategy {self.kind!r}")


@dataclass
class QueryPlan:
    dfs_edges: list[OrientedEdge]
    pi: list[int]
    # non_dfs_checks[j]: earlier vertices that must be adjacent to pi[j]
    non_dfs_checks: list[list[int]]
    total_cost: float
    start: int
    edge_costs: list[float] = field(default_factory=list)

    def position(self) -> dict[int, int]:
        return {q: i for i, q in enumerate(self.pi)}

    def non_dfs_edges(self) -> list[tuple[int, int]]:
        return [(qi, self.pi[j]) for j, checks in enumerate(self.non_dfs_checks) for qi in checks]

    def describe(self) -> str:
        lines = [f"start q{self.start}  cost {self.total_cost:g}"]
        lines.append("dfs edges: " + " ".join(f"(q{a},q{b})" for a, b in self.dfs_edges))
        lines.append("pi: " + " ".join(f"q{q}" for q in self.pi))
        checks = [f"q{self.pi[j]}<-{{{','.join(f'q{i}' for i in c)}}}" for j, c in enumerate(self.non_dfs_checks) if c]
        lines.append("non-dfs checks: " + (" ".join(checks) if checks else "none"))
        return "\n".join(lines)


def neighborhood_frequencies(q: Graph, v: int, label_counts: Sequence[int]) -> list[int]:
    """Data-graph frequencies of the labels on ``v``'s neighbors in the query."""
    return [_count(label_counts, q.labels[w]) for w in q.adj[v]]


def _count(label_counts: Sequence[int], label: int) -> int:
    return label_counts[label] if label < len(label_counts) else 0


def edge_cost(strategy: CostStrategy, q: Graph, qi: int, qj: int) -> float:
    if not q.has_edge(qi, qj):
        raise NotAnEdgeError(f"(q{qi}, q{qj}) is not a query edge")
    if strategy.kind == "deg":
        return -(q.degree(qi) + q.degree(qj))
    counts = strategy.label_counts
    if counts is None:
        raise UnsupportedParameterError("label-frequency cost needs data label counts")
    return min(neighborhood_frequencies(q, qi, counts)) + min(neighborhood_frequencies(q, qj, counts))


def select_start_vertices(
    strategy: StartStrategy, q: Graph, label_counts: Sequence[int] | None = None
) -> list[int]:
    n = q.vertex_count
    if n == 0:
        raise UnsupportedParameterError("query graph is empty")
    k = strategy.K if strategy.K is not None else min(3, n)
    if not 1 <= k <= n:
        raise UnsupportedParameterError(f"K={k} outside [1, {n}]")
    if strategy.kind == "maxdeg":
        return sorted(range(n), key=lambda v: (-q.degree(v), v))[:k]
    if strategy.kind == "minlf":
        if label_counts is None:
            raise UnsupportedParameterError("MinLF needs data label counts")
        return sorted(range(n), key=lambda v: (_count(label_counts, q.labels[v]), v))[:k]
    return random.Random(strategy.seed).sample(range(n), k)


def dfs_plan(q: Graph, start: int, cost: CostStrategy) -> QueryPlan:
    """Greedy DFS from ``start``: always take the cheapest edge out of the stack top."""
    visited = [False] * q.vertex_count
    visited[start] = True
    pi = [start]
    stack = [start]
    dfs_edges: list[OrientedEdge] = []
    costs: list[float] = []
    while stack:
        top = stack[-1]
        frontier = [w for w in q.adj[top] if not visited[w]]
        if not frontier:
            stack.pop()
            continue
        best = min(frontier, key=lambda w: (edge_cost(cost, q, top, w), w))
        dfs_edges.append(OrientedEdge(top, best))
        costs.append(edge_cost(cost, q, top, best))
        visited[best] = True
        pi.append(best)
        stack.append(best)
    if len(pi) != q.vertex_count:
        raise DisconnectedQueryError("query graph is disconnected")
    pos = {v: i for i, v in enumerate(pi)}
    tree = {frozenset(e) for e in dfs_edges}
    checks: list[list[int]] = [[] for _ in pi]
    for a, b in q.edges():
        if frozenset((a, b)) in tree:
            continue
        early, late = (a, b) if pos[a] < pos[b] else (b, a)
        checks[pos[late]].append(early)
    for c in checks:
        c.sort(key=pos.__getitem__)
    return QueryPlan(dfs_edges, pi, checks, float(sum(costs)), start, costs)


def explore_plans(
    q: Graph,
    cost: CostStrategy | None = None,
    start: StartStrategy | None = None,
    label_counts: Sequence[int] | None = None,
) -> list[QueryPlan]:
    """One candidate plan per start vertex, in start-vertex order."""
    cost = cost or CostStrategy()
    start = start or StartStrategy()
    if label_counts is None:
        label_counts = cost.label_counts
    elif cost.kind == "lf" and cost.label_counts is None:
        cost = CostStrategy("lf", tuple(label_counts))
    if not q.is_connected():
        raise DisconnectedQueryError("query graph is disconnected")
    return [dfs_plan(q, s, cost) for s in select_start_vertices(start, q, label_counts)]


def plan_query(
    q: Graph,
    cost: CostStrategy | None = None,
    start: StartStrategy | None = None,
    label_counts: Sequence[int] | None = None,
) -> QueryPlan:
    plans = explore_plans(q, cost, start, label_counts)
    best = plans[0]
    for p in plans[1:]:
        if p.total_cost < best.total_cost:
            best = p
    return best
