"""The three offline hash indexes over anchored-star keys and path codes.

``i_s`` holds stars of sparse-sparse and sparse-dense edges centered at the
low-label endpoint, ``i_s_prime`` stars of dense-sparse edges centered at the
sparse endpoint, and ``i_p`` the path codes of dense-dense edges. Edges are
stored in their label-normalized orientation in all three.
"""

from __future__ import annotations

import hashlib
import io
import struct
from collections import defaultdict
from collections.abc import Iterable
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embedding.keys import EmbeddingKey, StarEmbedder
from .errors import DigestMismatchError, FormatError
from .features import PathCode, check_k, enumerate_anchored_paths, iter_star_shapes
from .graph import EdgeType, Graph, OrientedEdge, classify_edge, normalized_edges

MAGIC = b"GAE-IDX1"
VERSION = 1

LabelPair = tuple[int, int]
StarTable = dict[tuple[int, ...], dict[LabelPair, list[OrientedEdge]]]
PathTable = dict[PathCode, list[OrientedEdge]]

FAMILY_S = "S"
FAMILY_S_PRIME = "S'"
FAMILY_P = "P"


@dataclass(frozen=True)
class IndexMeta:
    dstar: int
    k: int
    backend: str
    model_digest: str
    graph_digest: str


@dataclass
class IndexStats:
    star_insertions: int = 0  # stars counted with multiplicity
    path_insertions: int = 0


@dataclass
class AnchorIndexes:
    i_s: StarTable
    i_s_prime: StarTable
    i_p: PathTable
    meta: IndexMeta
    stats: IndexStats

    def _check_key(self, key: EmbeddingKey) -> None:
        if key.backend != self.meta.backend or key.model_digest != self.meta.model_digest:
            raise DigestMismatchError(
                f"key from {key.backend}:{key.model_digest[:12]} does not match index built with "
                f"{self.meta.backend}:{self.meta.model_digest[:12]}"
            )

    def lookup_star(self, family: str, key: EmbeddingKey, label_pair: LabelPair) -> list[OrientedEdge]:
        self._check_key(key)
        if family not in (FAMILY_S, FAMILY_S_PRIME):
            raise ValueError(f"not a star family: {family!r}")
        table = self.i_s if family == FAMILY_S else self.i_s_prime
        entry = table.get(key.values)
        if entry is None:
            return []
        return entry.get(tuple(label_pair), [])

    def lookup_path(self, code: PathCode) -> list[OrientedEdge]:
        return self.i_p.get(tuple(code), [])

    def check_embedder(self, embedder: StarEmbedder) -> None:
        if embedder.backend != self.meta.backend or embedder.digest != self.meta.model_digest:
            raise DigestMismatchError(
                f"embedder {embedder.backend}:{embedder.digest[:12]} does not match index built "
                f"with {self.meta.backend}:{self.meta.model_digest[:12]}"
            )

    def check_graph(self, g: Graph) -> None:
        if g.digest() != self.meta.graph_digest:
            raise DigestMismatchError("index was built for a different data graph")

    def family_edges(self, family: str) -> set[OrientedEdge]:
        if family == FAMILY_P:
            return {e for edges in self.i_p.values() for e in edges}
        table = self.i_s if family == FAMILY_S else self.i_s_prime
        return {e for entry in table.values() for edges in entry.values() for e in edges}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AnchorIndexes):
            return NotImplemented
        return (
            self.meta == other.meta
            and self.i_s == other.i_s
            and self.i_s_prime == other.i_s_prime
            and self.i_p == other.i_p
        )


def star_family(kind: EdgeType) -> str:
    if kind in (EdgeType.SPARSE_SPARSE, EdgeType.SPARSE_DENSE):
        return FAMILY_S
    if kind is EdgeType.DENSE_SPARSE:
        return FAMILY_S_PRIME
    return FAMILY_P


def build_indexes(g: Graph, embedder: StarEmbedder, dstar: int, k: int = 1) -> AnchorIndexes:
    check_k(k)
    stats = IndexStats()
    # (family, edge, triple) rows; keys are computed once per distinct triple
    pending: list[tuple[str, OrientedEdge, tuple]] = []
    i_p: dict[PathCode, set[OrientedEdge]] = defaultdict(set)
    for e in normalized_edges(g):
        u, v = e
        family = star_family(classify_edge(g, e, dstar))
        if family == FAMILY_P:
            codes = enumerate_anchored_paths(g, e, k)
            stats.path_insertions += len(codes)
            for code in codes:
                i_p[code].add(e)
            continue
        center_edge = e if family == FAMILY_S else OrientedEdge(v, u)
        for star, mult in iter_star_shapes(g, center_edge, k):
            stats.star_insertions += mult
            pending.append((family, e, star.canonical))
    triples = list({t for _, _, t in pending})
    values = dict(zip(triples, embedder.values_for(triples)))
    tables: dict[str, dict] = {FAMILY_S: {}, FAMILY_S_PRIME: {}}
    labels = g.labels
    for family, e, t in pending:
        entry = tables[family].setdefault(values[t], {})
        entry.setdefault((labels[e[0]], labels[e[1]]), set()).add(e)
    i_s = _freeze_stars(tables[FAMILY_S])
    i_s_prime = _freeze_stars(tables[FAMILY_S_PRIME])
    meta = IndexMeta(dstar, k, embedder.backend, embedder.digest, g.digest())
    return AnchorIndexes(i_s, i_s_prime, {c: sorted(es) for c, es in i_p.items()}, meta, stats)


def _freeze_stars(table: dict) -> StarTable:
    return {
        key: {pair: sorted(edges) for pair, edges in entry.items()} for key, entry in table.items()
    }


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------


def _pack_str(buf: io.BytesIO, s: str) -> None:
    raw = s.encode()
    buf.write(struct.pack("<I", len(raw)))
    buf.write(raw)


def _pack_edges(buf: io.BytesIO, edges: list[OrientedEdge]) -> None:
    buf.write(struct.pack("<I", len(edges)))
    buf.write(np.asarray(edges, dtype="<u4").reshape(-1).tobytes())


def _pack_star_table(buf: io.BytesIO, table: StarTable) -> None:
    width = len(next(iter(table))) if table else 0
    buf.write(struct.pack("<II", len(table), width))
    for key in sorted(table):
        buf.write(struct.pack(f"<{width}q", *key))
        entry = table[key]
        buf.write(struct.pack("<I", len(entry)))
        for pair in sorted(entry):
            buf.write(struct.pack("<ii", *pair))
            _pack_edges(buf, entry[pair])


def _payload(idx: AnchorIndexes) -> bytes:
    buf = io.BytesIO()
    m = idx.meta
    buf.write(struct.pack("<II", m.dstar, m.k))
    for s in (m.backend, m.model_digest, m.graph_digest):
        _pack_str(buf, s)
    buf.write(struct.pack("<QQ", idx.stats.star_insertions, idx.stats.path_insertions))
    _pack_star_table(buf, idx.i_s)
    _pack_star_table(buf, idx.i_s_prime)
    buf.write(struct.pack("<I", len(idx.i_p)))
    for code in sorted(idx.i_p):
        buf.write(struct.pack(f"<B{len(code)}i", len(code), *code))
        _pack_edges(buf, idx.i_p[code])
    return buf.getvalue()


def save_indexes(idx: AnchorIndexes, path: str | Path) -> None:
    payload = _payload(idx)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(payload)
        fh.write(hashlib.sha256(payload).digest())


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError("index file is truncated")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def string(self) -> str:
        (n,) = self.unpack("<I")
        return self.take(n).decode()

    def edges(self) -> list[OrientedEdge]:
        (n,) = self.unpack("<I")
        flat = np.frombuffer(self.take(8 * n), dtype="<u4").tolist()
        return [OrientedEdge(flat[i], flat[i + 1]) for i in range(0, 2 * n, 2)]

    def star_table(self) -> StarTable:
        count, width = self.unpack("<II")
        table: StarTable = {}
        for _ in range(count):
            key = self.unpack(f"<{width}q")
            (pairs,) = self.unpack("<I")
            entry = {}
            for _ in range(pairs):
                pair = self.unpack("<ii")
                entry[pair] = self.edges()
            table[key] = entry
        return table


def load_indexes(path: str | Path) -> AnchorIndexes:
    data = Path(path).read_bytes()
    if data[: len(MAGIC)] != MAGIC:
        raise FormatError(f"{path}: not an index file (bad magic)")
    if len(data) < len(MAGIC) + 4 + 32:
        raise FormatError(f"{path}: index file is truncated")
    (version,) = struct.unpack("<I", data[len(MAGIC) : len(MAGIC) + 4])
    if version != VERSION:
        raise FormatError(f"{path}: unsupported index version {version}")
    payload, digest = data[len(MAGIC) + 4 : -32], data[-32:]
    if hashlib.sha256(payload).digest() != digest:
        raise FormatError(f"{path}: checksum mismatch (truncated or corrupted)")
    r = _Reader(payload)
    dstar, k = r.unpack("<II")
    meta = IndexMeta(dstar, k, r.string(), r.string(), r.string())
    stats = IndexStats(*r.unpack("<QQ"))
    i_s = r.star_table()
    i_s_prime = r.star_table()
    (count,) = r.unpack("<I")
    i_p: PathTable = {}
    for _ in range(count):
        (length,) = r.unpack("<B")
        code = r.unpack(f"<{length}i")
        i_p[code] = r.edges()
    if r.pos != len(payload):
        raise FormatError(f"{path}: trailing bytes after index payload")
    return AnchorIndexes(i_s, i_s_prime, i_p, meta, stats)


def index_summary(idx: AnchorIndexes) -> dict[str, int]:
    def entries(table: StarTable) -> int:
        return sum(len(e) for e in table.values())

    return {
        "i_s_keys": len(idx.i_s),
        "i_s_entries": entries(idx.i_s),
        "i_s_prime_keys": len(idx.i_s_prime),
        "i_s_prime_entries": entries(idx.i_s_prime),
        "i_p_keys": len(idx.i_p),
        "star_insertions": idx.stats.star_insertions,
        "path_insertions": idx.stats.path_insertions,
    }


def all_family_edges(idx: AnchorIndexes) -> Iterable[tuple[str, set[OrientedEdge]]]:
    for fam in (FAMILY_S, FAMILY_S_PRIME, FAMILY_P):
        yield fam, idx.family_edges(fam)
