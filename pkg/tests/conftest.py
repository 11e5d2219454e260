from __future__ import annotations

import random

import pytest

from anchormatch.graph import Graph
from anchormatch.workbench.generators import GenSpec, QueryGenSpec, generate_graph, generate_queries

A, B, C, D, E = range(5)


def v(i: int) -> int:
    """1-based vertex name in the sample instance -> 0-based id."""
    return i - 1


def sample_graph() -> Graph:
    """13-vertex sample data graph (labels A..E = 0..4).

    Degree threshold 3 gives: sparse-sparse (v1,v3), (v1,v2), (v13,v12);
    sparse-dense (v13,v8); dense-sparse (v5,v3), (v9,v12); dense-dense
    (v5,v8), (v9,v8).
    """
    labels = [0] * 13
    for i, lab in {1: A, 2: C, 3: B, 4: E, 5: A, 6: D, 7: E, 8: C, 9: A, 10: D, 11: D, 12: B, 13: A}.items():
        labels[v(i)] = lab
    edges = [
        (1, 3), (1, 2), (3, 5), (5, 8), (5, 6), (5, 7), (7, 8),
        (8, 9), (8, 13), (9, 12), (9, 10), (9, 11), (12, 13),
    ]
    return Graph.from_edges(labels, [(v(a), v(b)) for a, b in edges], 5)


def sample_query() -> Graph:
    """q1..q5 -> ids 0..4, labels A B A C D; the edge (q1,q4) closes a cycle."""
    labels = [A, B, A, C, D]
    edges = [(0, 1), (1, 2), (2, 3), (2, 4), (0, 3)]
    return Graph.from_edges(labels, edges, 5)


@pytest.fixture
def example_graph() -> Graph:
    return sample_graph()


@pytest.fixture
def example_query() -> Graph:
    return sample_query()


def triangle(label: int = 0) -> Graph:
    return Graph.from_edges([label] * 3, [(0, 1), (1, 2), (0, 2)], 1)


def complete_graph(n: int, label: int = 0) -> Graph:
    return Graph.from_edges([label] * n, [(a, b) for a in range(n) for b in range(a + 1, n)], 1)


def random_instances(count: int, seed: int, max_vertices: int = 120, sizes=(3, 6)):
    """Seeded (graph, query, dstar) triples over all generators and alphabet sizes."""
    rng = random.Random(seed)
    models = ("random-regular", "nws", "ba")
    out = []
    while len(out) < count:
        i = len(out)
        n, deg = rng.randint(20, max_vertices), rng.choice([3, 4, 5, 6])
        if models[i % 3] == "random-regular" and n * deg % 2:
            n += 1
        g = generate_graph(GenSpec(models[i % 3], n, deg, rng.choice([3, 10, 50]), seed=rng.randrange(1 << 30)))
        q = generate_queries(g, QueryGenSpec(rng.randint(*sizes), 1, rng.randrange(1 << 30)))[0]
        out.append((g, q, rng.choice([3, 10])))
    return out


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
