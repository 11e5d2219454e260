"""Filtering power and per-query run reports."""

from __future__ import annotations

import json
from collections.abc import Iterable
from dataclasses import asdict, dataclass, field

from ..engine import FAMILIES, QueryResult
from ..graph import Graph

STAGES = ("plan", "embed", "candidates", "growth")


@dataclass
class EdgeFiltering:
    edge: tuple[int, int]
    baseline: int  # ordered data pairs with the query edge's label pair
    kept: int  # candidate pairs retrieved
    true: int  # pairs used by some exact match

    @property
    def power(self) -> float:
        return filtering_ratio(self.baseline, self.kept, self.true)


def filtering_ratio(baseline: int, kept: int, true: int) -> float:
    """``1 - (kept - true) / (baseline - true)``; 1.0 when nothing could be filtered."""
    if baseline == true:
        return 1.0
    return 1.0 - (kept - true) / (baseline - true)


def label_pair_counts(g: Graph) -> dict[tuple[int, int], int]:
    """Number of ordered adjacent pairs ``(x, y)`` per label pair ``(L(x), L(y))``."""
    counts: dict[tuple[int, int], int] = {}
    labels = g.labels
    for x in range(g.vertex_count):
        lx = labels[x]
        for y in g.adj[x]:
            key = (lx, labels[y])
            counts[key] = counts.get(key, 0) + 1
    return counts


def filtering_power(
    q: Graph,
    result: QueryResult,
    truth: Iterable[tuple[int, ...]],
    pair_counts: dict[tuple[int, int], int],
) -> list[EdgeFiltering]:
    """Per-dfs-edge filtering against the label-only baseline.

    ``truth`` is the exact match set (bindings indexed by query vertex);
    ``pair_counts`` comes from :func:`label_pair_counts` on the data graph.
    """
    truth = list(truth)
    out = []
    for cs in result.table.sets:
        a, b = cs.edge
        used = {(m[a], m[b]) for m in truth}
        baseline = pair_counts.get((q.labels[a], q.labels[b]), 0)
        out.append(EdgeFiltering((a, b), baseline, len(cs), len(used)))
    return out


def aggregate_power(edges: Iterable[EdgeFiltering]) -> float:
    """Pooled ratio over many edges: sums of removable and of kept-but-invalid pairs."""
    removable = invalid = 0
    for e in edges:
        removable += e.baseline - e.true
        invalid += e.kept - e.true
    return 1.0 if removable == 0 else 1.0 - invalid / removable


@dataclass
class QueryRecord:
    query: str
    vertices: int
    edges: int
    matches: int
    timings_us: dict[str, int]
    total_us: int
    candidates: dict[str, int]
    filtering_power: float | None = None

    @classmethod
    def from_result(
        cls, name: str, q: Graph, result: QueryResult, power: float | None = None
    ) -> QueryRecord:
        timings = {s: int(result.timings_us.get(s, 0)) for s in STAGES}
        return cls(
            name,
            q.vertex_count,
            q.edge_count,
            len(result.matches),
            timings,
            sum(timings.values()),
            result.family_counts(),
            power,
        )


@dataclass
class RunReport:
    records: list[QueryRecord] = field(default_factory=list)
    conflict_ratio: float | None = None
    aggregate_filtering_power: float | None = None

    def add(self, record: QueryRecord) -> None:
        self.records.append(record)

    def totals(self) -> dict[str, int]:
        out = {"queries": len(self.records), "matches": 0, "total_us": 0}
        for s in STAGES:
            out[f"{s}_us"] = 0
        for fam in FAMILIES:
            out[f"candidates_{fam}"] = 0
        for r in self.records:
            out["matches"] += r.matches
            out["total_us"] += r.total_us
            for s in STAGES:
                out[f"{s}_us"] += r.timings_us[s]
            for fam in FAMILIES:
                out[f"candidates_{fam}"] += r.candidates[fam]
        return out

    def to_json_lines(self) -> str:
        lines = [json.dumps({"record": "query", **asdict(r)}, sort_keys=True) for r in self.records]
        summary = {"record": "summary", **self.totals()}
        if self.conflict_ratio is not None:
            summary["conflict_ratio"] = self.conflict_ratio
        if self.aggregate_filtering_power is not None:
            summary["filtering_power"] = self.aggregate_filtering_power
        lines.append(json.dumps(summary, sort_keys=True))
        return "\n".join(lines) + "\n"

    def summary_text(self) -> str:
        t = self.totals()
        parts = [
            f"{t['queries']} queries, {t['matches']} matches",
            "time(us) " + " ".join(f"{s}={t[f'{s}_us']}" for s in STAGES) + f" total={t['total_us']}",
            "candidates " + " ".join(f"{fam}={t[f'candidates_{fam}']}" for fam in FAMILIES),
        ]
        if self.aggregate_filtering_power is not None:
            parts.append(f"filtering power {self.aggregate_filtering_power:.6f}")
        if self.conflict_ratio is not None:
            parts.append(f"conflict ratio {self.conflict_ratio:.3e}")
        return "\n".join(parts)
