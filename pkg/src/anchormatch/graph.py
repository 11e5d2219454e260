"""Vertex-labeled undirected graphs, the ``t/v/e`` text format, and edge typing."""

from __future__ import annotations

import enum
import hashlib
import io
from bisect import bisect_left
from collections.abc import Iterable, Iterator, Sequence
from pathlib import Path
from typing import NamedTuple, TextIO

from .errors import (
    DegreeMismatchError,
    DuplicateEdgeError,
    InvalidVertexError,
    MalformedLineError,
    NotAnEdgeError,
    SelfLoopError,
    UnknownVertexError,
)


class OrientedEdge(NamedTuple):
    """An edge with a meaningful direction; ``src`` is the anchor center."""

    src: int
    dst: int


class EdgeType(enum.Enum):
    SPARSE_SPARSE = "sparse-sparse"
    SPARSE_DENSE = "sparse-dense"
    DENSE_SPARSE = "dense-sparse"
    DENSE_DENSE = "dense-dense"


class Graph:
    """Immutable vertex-labeled simple undirected graph.

    Adjacency lists are stored sorted so membership tests are a bisection.
    """

    __slots__ = ("labels", "adj", "edge_count", "sigma_size", "_digest")

    def __init__(
        self,
        labels: Sequence[int],
        adjacency: Sequence[Sequence[int]],
        sigma_size: int | None = None,
    ):
        labels = tuple(int(x) for x in labels)
        if len(adjacency) != len(labels):
            raise ValueError("adjacency and labels disagree on vertex count")
        adj = tuple(tuple(sorted(int(w) for w in nbrs)) for nbrs in adjacency)
        n = len(labels)
        total = 0
        for v, nbrs in enumerate(adj):
            for i, w in enumerate(nbrs):
                if not 0 <= w < n:
                    raise InvalidVertexError(f"neighbor {w} of {v} out of range")
                if w == v:
                    raise SelfLoopError(f"self-loop on vertex {v}")
                if i and nbrs[i - 1] == w:
                    raise DuplicateEdgeError(f"duplicate edge ({v}, {w})")
            total += len(nbrs)
        for v, nbrs in enumerate(adj):
            for w in nbrs:
                if not _contains(adj[w], v):
                    raise ValueError(f"asymmetric adjacency: {v}->{w} without {w}->{v}")
        if any(x < 0 for x in labels):
            raise ValueError("labels must be non-negative")
        needed = (max(labels) + 1) if labels else 0
        if sigma_size is None:
            sigma_size = needed
        elif sigma_size < needed:
            raise ValueError(f"sigma_size {sigma_size} too small for label {needed - 1}")
        self.labels = labels
        self.adj = adj
        self.edge_count = total // 2
        self.sigma_size = sigma_size
        self._digest: str | None = None

    @classmethod
    def from_edges(
        cls,
        labels: Sequence[int],
        edges: Iterable[tuple[int, int]],
        sigma_size: int | None = None,
    ) -> Graph:
        n = len(labels)
        adjacency: list[list[int]] = [[] for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidVertexError(f"edge ({u}, {v}) references unknown vertex")
            adjacency[u].append(v)
            adjacency[v].append(u)
        return cls(labels, adjacency, sigma_size)

    @property
    def vertex_count(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def label(self, v: int) -> int:
        return self.labels[v]

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adj[v]

    def has_edge(self, u: int, v: int) -> bool:
        n = len(self.labels)
        if not (0 <= u < n and 0 <= v < n):
            raise InvalidVertexError(f"vertex pair ({u}, {v}) out of range")
        a, b = self.adj[u], self.adj[v]
        if len(b) < len(a):
            a, u, v = b, v, u
        return _contains(a, v)

    def edges(self) -> Iterator[tuple[int, int]]:
        """Each undirected edge once, as ``(u, v)`` with ``u < v``."""
        for u, nbrs in enumerate(self.adj):
            for v in nbrs[bisect_left(nbrs, u + 1):]:
                yield u, v

    def label_counts(self) -> list[int]:
        counts = [0] * self.sigma_size
        for x in self.labels:
            counts[x] += 1
        return counts

    def is_connected(self) -> bool:
        n = len(self.labels)
        if n == 0:
            return True
        seen = bytearray(n)
        seen[0] = 1
        stack = [0]
        reached = 1
        while stack:
            v = stack.pop()
            for w in self.adj[v]:
                if not seen[w]:
                    seen[w] = 1
                    reached += 1
                    stack.append(w)
        return reached == n

    def induced_subgraph(self, vertices: Sequence[int]) -> Graph:
        """Subgraph induced on ``vertices``; vertex ``vertices[i]`` becomes ``i``."""
        index = {v: i for i, v in enumerate(vertices)}
        adjacency = [[index[w] for w in self.adj[v] if w in index] for v in vertices]
        return Graph([self.labels[v] for v in vertices], adjacency, self.sigma_size)

    def digest(self) -> str:
        """SHA-256 of the canonical text serialization (hex)."""
        if self._digest is None:
            buf = io.StringIO()
            write_graph(self, buf)
            self._digest = hashlib.sha256(buf.getvalue().encode()).hexdigest()
        return self._digest

    def same_as(self, other: Graph) -> bool:
        return self.labels == other.labels and self.adj == other.adj

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.same_as(other) and self.sigma_size == other.sigma_size

    def __hash__(self) -> int:
        return hash((self.labels, self.adj))

    def __repr__(self) -> str:
        return f"Graph(|V|={self.vertex_count}, |E|={self.edge_count}, |Σ|={self.sigma_size})"


def _contains(sorted_seq: Sequence[int], x: int) -> bool:
    i = bisect_left(sorted_seq, x)
    return i < len(sorted_seq) and sorted_seq[i] == x


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------


def parse_graph(stream: TextIO | str | Path, sigma_size: int | None = None) -> Graph:
    """Parse the ``t/v/e`` line format.

    ``stream`` may be an open text stream, a path, or the literal text when it
    contains a newline. A ``/`` may separate records on one line (convenient
    for inline fixtures), so ``"t 2 1 / v 0 0 1 / v 1 1 1 / e 0 1"`` is valid.
    """
    if isinstance(stream, Path) or (isinstance(stream, str) and "\n" not in stream and "/" not in stream):
        with open(stream) as fh:
            return _parse_lines(fh, sigma_size)
    if isinstance(stream, str):
        return _parse_lines(io.StringIO(stream), sigma_size)
    return _parse_lines(stream, sigma_size)


def _records(lines: Iterable[str]) -> Iterator[tuple[int, list[str]]]:
    for lineno, raw in enumerate(lines, 1):
        for chunk in raw.split("/"):
            parts = chunk.split()
            if parts and not parts[0].startswith("#"):
                yield lineno, parts


def _int(tok: str, lineno: int) -> int:
    try:
        value = int(tok)
    except ValueError:
        raise MalformedLineError(f"expected integer, got {tok!r}", lineno) from None
    if value < 0:
        raise MalformedLineError(f"negative value {value}", lineno)
    return value


def _parse_lines(lines: Iterable[str], sigma_size: int | None) -> Graph:
    records = _records(lines)
    try:
        lineno, head = next(records)
    except StopIteration:
        raise MalformedLineError("empty input: missing 't' header") from None
    if head[0] != "t" or len(head) != 3:
        raise MalformedLineError("expected header 't <|V|> <|E|>'", lineno)
    n, m = _int(head[1], lineno), _int(head[2], lineno)

    labels: list[int | None] = [None] * n
    declared: list[int | None] = [None] * n
    adjacency: list[set[int]] = [set() for _ in range(n)]
    edges_seen = 0
    last_line = lineno
    for lineno, parts in records:
        last_line = lineno
        kind = parts[0]
        if kind == "v":
            if len(parts) not in (3, 4):
                raise MalformedLineError("expected 'v <id> <label> [<degree>]'", lineno)
            if edges_seen:
                raise MalformedLineError("vertex line after edge lines", lineno)
            vid = _int(parts[1], lineno)
            if vid >= n:
                raise UnknownVertexError(f"vertex id {vid} >= declared |V|={n}", lineno)
            if labels[vid] is not None:
                raise MalformedLineError(f"vertex {vid} declared twice", lineno)
            labels[vid] = _int(parts[2], lineno)
            if len(parts) == 4:
                declared[vid] = _int(parts[3], lineno)
        elif kind == "e":
            if len(parts) not in (3, 4):
                raise MalformedLineError("expected 'e <u> <v>'", lineno)
            u, v = _int(parts[1], lineno), _int(parts[2], lineno)
            for x in (u, v):
                if x >= n:
                    raise UnknownVertexError(f"edge endpoint {x} is not a declared vertex", lineno)
            if u == v:
                raise SelfLoopError(f"self-loop on vertex {u}", lineno)
            if v in adjacency[u]:
                raise DuplicateEdgeError(f"duplicate edge ({u}, {v})", lineno)
            adjacency[u].add(v)
            adjacency[v].add(u)
            edges_seen += 1
        else:
            raise MalformedLineError(f"unknown record type {kind!r}", lineno)

    missing = [i for i, x in enumerate(labels) if x is None]
    if missing:
        raise MalformedLineError(f"vertex {missing[0]} never declared", last_line)
    if edges_seen != m:
        raise MalformedLineError(f"header declares {m} edges, found {edges_seen}", last_line)
    for vid, deg in enumerate(declared):
        if deg is not None and deg != len(adjacency[vid]):
            raise DegreeMismatchError(
                f"vertex {vid} declares degree {deg}, has {len(adjacency[vid])}", 0
            )
    return Graph(labels, adjacency, sigma_size)  # type: ignore[arg-type]


def write_graph(g: Graph, stream: TextIO | str | Path) -> None:
    if isinstance(stream, (str, Path)):
        with open(stream, "w") as fh:
            write_graph(g, fh)
        return
    stream.write(f"t {g.vertex_count} {g.edge_count}\n")
    for v, lab in enumerate(g.labels):
        stream.write(f"v {v} {lab} {g.degree(v)}\n")
    for u, v in g.edges():
        stream.write(f"e {u} {v}\n")


def graph_to_text(g: Graph) -> str:
    buf = io.StringIO()
    write_graph(g, buf)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# orientation and typing
# ---------------------------------------------------------------------------


def normalize_edge(g: Graph, u: int, v: int) -> list[OrientedEdge]:
    """Orient ``(u, v)`` low label first; equal labels yield both orientations."""
    if not g.has_edge(u, v):
        raise NotAnEdgeError(f"({u}, {v}) is not an edge")
    lu, lv = g.labels[u], g.labels[v]
    if lu < lv:
        return [OrientedEdge(u, v)]
    if lv < lu:
        return [OrientedEdge(v, u)]
    return [OrientedEdge(u, v), OrientedEdge(v, u)]


def normalized_edges(g: Graph) -> Iterator[OrientedEdge]:
    """All label-normalized orientations of every edge, in a fixed order."""
    labels = g.labels
    for u, v in g.edges():
        if labels[u] < labels[v]:
            yield OrientedEdge(u, v)
        elif labels[v] < labels[u]:
            yield OrientedEdge(v, u)
        else:
            yield OrientedEdge(u, v)
            yield OrientedEdge(v, u)


def edge_type_for_degrees(d_from: int, d_to: int, dstar: int) -> EdgeType:
    if d_from <= dstar:
        return EdgeType.SPARSE_SPARSE if d_to <= dstar else EdgeType.SPARSE_DENSE
    return EdgeType.DENSE_SPARSE if d_to <= dstar else EdgeType.DENSE_DENSE


def classify_edge(g: Graph, e: OrientedEdge, dstar: int) -> EdgeType:
    return edge_type_for_degrees(g.degree(e[0]), g.degree(e[1]), dstar)
