"""Online matching: per-edge candidate retrieval and parallel match-tree growth."""

from __future__ import annotations

import threading
import time
from collections.abc import Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .embedding.keys import EmbeddingKey, StarEmbedder
from .errors import QueryTooSmallError
from .features import PathCode, max_anchored_paths, max_anchored_star
from .graph import Graph, OrientedEdge, normalize_edge
from .index import FAMILY_P, FAMILY_S, FAMILY_S_PRIME, AnchorIndexes
from .planner import CostStrategy, QueryPlan, StartStrategy, plan_query

FAMILIES = (FAMILY_S, FAMILY_S_PRIME, FAMILY_P)

Binding = tuple[int, ...]  # data vertex per query vertex id


@dataclass
class EdgeFeatures:
    """Query-side lookup material for one label-normalized orientation ``(qi, qj)``."""

    qi: int
    qj: int
    label_pair: tuple[int, int]
    star_key: EmbeddingKey  # max star centered at qi
    star_key_prime: EmbeddingKey  # max star centered at qj
    path_codes: list[PathCode]


@dataclass
class CandidateSet:
    edge: OrientedEdge  # query edge in plan orientation
    # (data vertex for edge.src, data vertex for edge.dst) -> family
    pairs: dict[tuple[int, int], str]

    def __len__(self) -> int:
        return len(self.pairs)

    def by_family(self) -> dict[str, set[tuple[int, int]]]:
        out: dict[str, set[tuple[int, int]]] = {f: set() for f in FAMILIES}
        for pair, fam in self.pairs.items():
            out[fam].add(pair)
        return out

    def data_edges(self) -> set[frozenset[int]]:
        return {frozenset(p) for p in self.pairs}


@dataclass
class CandidateTable:
    sets: list[CandidateSet]
    # groups[t][x]: data vertices for the target of dfs edge t when its source is bound to x
    groups: list[dict[int, list[int]]]

    @classmethod
    def build(cls, sets: list[CandidateSet]) -> CandidateTable:
        groups = []
        for cs in sets:
            g: dict[int, list[int]] = {}
            for a, b in sorted(cs.pairs):
                g.setdefault(a, []).append(b)
            groups.append(g)
        return cls(sets, groups)


@dataclass
class QueryResult:
    matches: set[Binding]
    plan: QueryPlan
    table: CandidateTable
    timings_us: dict[str, int] = field(default_factory=dict)

    def family_counts(self) -> dict[str, int]:
        totals = {f: 0 for f in FAMILIES}
        for cs in self.table.sets:
            for fam in cs.pairs.values():
                totals[fam] += 1
        return totals

    def candidate_count(self) -> int:
        return sum(len(cs) for cs in self.table.sets)

    def lines(self) -> list[str]:
        return [format_binding(b, self.plan.pi) for b in sorted(self.matches)]


def format_binding(binding: Binding, order: Iterable[int]) -> str:
    return " ".join(f"q{q}->u{binding[q]}" for q in order)


# ---------------------------------------------------------------------------
# candidates
# ---------------------------------------------------------------------------


def edge_features(q: Graph, qa: int, qb: int, embedder: StarEmbedder) -> list[EdgeFeatures]:
    out = []
    for qi, qj in normalize_edge(q, qa, qb):
        star = max_anchored_star(q, (qi, qj))
        star_prime = max_anchored_star(q, (qj, qi))
        k_s, k_sp = embedder.keys([star, star_prime])
        out.append(
            EdgeFeatures(
                qi, qj, (q.labels[qi], q.labels[qj]), k_s, k_sp, max_anchored_paths(q, (qi, qj))
            )
        )
    return out


def lookup_candidates(
    features: EdgeFeatures, indexes: AnchorIndexes
) -> dict[tuple[int, int], str]:
    """Data edges ``(u, v)`` (u for qi, v for qj) per family for one orientation."""
    out: dict[tuple[int, int], str] = {}
    for e in indexes.lookup_star(FAMILY_S, features.star_key, features.label_pair):
        out[e] = FAMILY_S
    for e in indexes.lookup_star(FAMILY_S_PRIME, features.star_key_prime, features.label_pair):
        out[e] = FAMILY_S_PRIME
    common: set[OrientedEdge] | None = None
    for code in features.path_codes:
        found = indexes.lookup_path(code)
        common = set(found) if common is None else common.intersection(found)
        if not common:
            break
    for e in common or ():
        out[e] = FAMILY_P
    return out


def candidates_from_features(
    edge: OrientedEdge, features: list[EdgeFeatures], indexes: AnchorIndexes
) -> CandidateSet:
    """Candidates for ``edge`` in plan orientation.

    With equal endpoint labels both orientations are looked up. A true match
    is retrieved by both (each data edge is indexed in both orientations), so
    the two results are intersected; the family tag comes from the
    orientation that agrees with the plan.
    """
    qa, qb = edge
    result: dict[tuple[int, int], str] | None = None
    for f in features:
        found = lookup_candidates(f, indexes)
        if (f.qi, f.qj) == (qa, qb):
            aligned = found
        else:
            aligned = {(v, u): fam for (u, v), fam in found.items()}
        if result is None:
            result = aligned
        elif (f.qi, f.qj) == (qa, qb):
            result = {p: fam for p, fam in aligned.items() if p in result}
        else:
            result = {p: fam for p, fam in result.items() if p in aligned}
    return CandidateSet(edge, result or {})


def get_candidates(
    q: Graph, edge: OrientedEdge, indexes: AnchorIndexes, embedder: StarEmbedder
) -> CandidateSet:
    indexes.check_embedder(embedder)
    return candidates_from_features(edge, edge_features(q, edge[0], edge[1], embedder), indexes)


# ---------------------------------------------------------------------------
# growth
# ---------------------------------------------------------------------------


def _grow(
    seed: tuple[int, int],
    plan: QueryPlan,
    table: CandidateTable,
    g: Graph,
    src_pos: list[int],
    checks: list[list[int]],
    emit,
) -> None:
    depth = len(plan.pi)
    binding = [-1] * depth
    binding[0], binding[1] = seed
    used = {seed[0], seed[1]}
    has_edge = g.has_edge

    def extend(level: int) -> None:
        if level == depth:
            emit(tuple(binding))
            return
        t = level - 1  # dfs edge placing pi[level]
        for y in table.groups[t].get(binding[src_pos[t]], ()):
            if y in used:  # Case 1: vertex already bound in this branch
                continue
            if not all(has_edge(binding[p], y) for p in checks[level]):
                continue  # Case 2: a non-DFS query edge has no data edge
            binding[level] = y
            used.add(y)
            extend(level + 1)
            used.discard(y)
        binding[level] = -1

    extend(2)


def match_growth(plan: QueryPlan, table: CandidateTable, g: Graph, workers: int = 1) -> set[Binding]:
    """All complete branches, as bindings indexed by query vertex id."""
    if not table.sets:
        return set()
    pos = plan.position()
    src_pos = [pos[e.src] for e in plan.dfs_edges]
    checks = [[pos[qi] for qi in c] for c in plan.non_dfs_checks]
    seeds = sorted(table.sets[0].pairs)
    out: list[tuple[int, ...]] = []
    lock = threading.Lock()

    def emit(by_position: tuple[int, ...]) -> None:
        binding = [0] * len(plan.pi)
        for i, q in enumerate(plan.pi):
            binding[q] = by_position[i]
        with lock:
            out.append(tuple(binding))

    def run(chunk: list[tuple[int, int]]) -> None:
        for seed in chunk:
            if len(plan.pi) == 2:
                emit(seed)
            else:
                _grow(seed, plan, table, g, src_pos, checks, emit)

    workers = max(1, workers)
    if workers == 1 or len(seeds) < 2:
        run(seeds)
    else:
        chunks = [seeds[i::workers] for i in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for f in [pool.submit(run, c) for c in chunks if c]:
                f.result()
    return set(out)


# ---------------------------------------------------------------------------
# end to end
# ---------------------------------------------------------------------------


def query(
    q: Graph,
    g: Graph,
    indexes: AnchorIndexes,
    embedder: StarEmbedder,
    cost: CostStrategy | None = None,
    start: StartStrategy | None = None,
    workers: int = 1,
) -> QueryResult:
    if q.vertex_count < 2 or q.edge_count == 0:
        raise QueryTooSmallError("queries need at least one edge")
    indexes.check_embedder(embedder)
    indexes.check_graph(g)
    label_counts = g.label_counts()
    if cost is not None and cost.kind == "lf" and cost.label_counts is None:
        cost = CostStrategy("lf", tuple(label_counts))
    t0 = time.perf_counter_ns()
    plan = plan_query(q, cost, start, label_counts)
    t1 = time.perf_counter_ns()
    feats = [edge_features(q, a, b, embedder) for a, b in plan.dfs_edges]
    t2 = time.perf_counter_ns()
    sets = [candidates_from_features(e, f, indexes) for e, f in zip(plan.dfs_edges, feats)]
    table = CandidateTable.build(sets)
    t3 = time.perf_counter_ns()
    matches = match_growth(plan, table, g, workers)
    t4 = time.perf_counter_ns()
    timings = {
        "plan": (t1 - t0) // 1000,
        "embed": (t2 - t1) // 1000,
        "candidates": (t3 - t2) // 1000,
        "growth": (t4 - t3) // 1000,
    }
    return QueryResult(matches, plan, table, timings)
