"""Undirected simple graphs with frozen sorted adjacency, and ego-network views.

The graph is CSR-packed and read-only after construction, so one
instance can be shared by any number of concurrent ego workers.
Vertex ids are dense nonnegative integers; ``compact_ids`` relabels
arbitrary external ids when an input file needs it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from ._kernels import ego_local_edges


class GraphFormatError(ValueError):
    """Malformed or empty edge-list input."""


@dataclass
class EdgeListStats:
    """What the loader kept and dropped."""

    edges: int = 0
    duplicates: int = 0
    self_loops: int = 0

    @property
    def dropped(self) -> int:
        return self.duplicates + self.self_loops


class Graph:
    """Undirected simple graph over vertices 0..n-1 with sorted adjacency."""

    __slots__ = ("n", "m", "indptr", "indices")

    def __init__(self, n: int, indptr: np.ndarray, indices: np.ndarray):
        self.n = int(n)
        self.m = int(indices.shape[0] // 2)
        self.indptr = indptr
        self.indices = indices
        indptr.setflags(write=False)
        indices.setflags(write=False)

    @classmethod
    def from_edges(cls, edges, n: int | None = None) -> "Graph":
        """Build from an (m, 2) array-like of endpoints.

        Self-loops and duplicate edges are dropped silently; use
        ``load_edge_list`` when the drop counts matter.  ``n`` may be
        given to include trailing isolated vertices.
        """
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size and edges.min() < 0:
            raise ValueError("vertex ids must be nonnegative")
        max_id = int(edges.max()) if edges.size else -1
        if n is None:
            n = max_id + 1
        elif max_id >= n:
            raise ValueError(f"edge endpoint {max_id} out of range for n={n}")
        n = int(n)
        lo = np.minimum(edges[:, 0], edges[:, 1])
        hi = np.maximum(edges[:, 0], edges[:, 1])
        keep = lo < hi
        lo, hi = lo[keep], hi[keep]
        if lo.size:
            key = np.unique(lo * n + hi)
            lo, hi = key // n, key % n
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.lexsort((dst, src))
        indices = dst[order]
        counts = np.bincount(src, minlength=n)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        return cls(n, indptr, indices)

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted neighbor ids of v (read-only view)."""
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return i < nb.shape[0] and nb[i] == v

    def edges(self) -> Iterator[tuple[int, int]]:
        """All edges (u, v) with u < v, in lexicographic order."""
        for u in range(self.n):
            nb = self.neighbors(u)
            for v in nb[np.searchsorted(nb, u + 1):]:
                yield u, int(v)

    def validate(self) -> None:
        """Check structural invariants; raises AssertionError on violation."""
        assert self.indptr.shape == (self.n + 1,)
        assert self.indptr[0] == 0 and self.indptr[-1] == self.indices.shape[0]
        assert self.indices.shape[0] == 2 * self.m
        for u in range(self.n):
            nb = self.neighbors(u)
            assert (np.diff(nb) > 0).all(), f"adjacency of {u} not strictly increasing"
            assert u not in nb, f"self-loop at {u}"
            for v in nb:
                assert self.has_edge(int(v), u), f"asymmetric edge {u}-{v}"

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def load_edge_list(lines: Iterable[str]) -> tuple[Graph, EdgeListStats]:
    """Parse an edge list: one "u v" pair per line, '#' lines ignored.

    Duplicate edges and self-loops are dropped and counted; ids are used
    verbatim, so n is the largest id plus one.
    """
    us: list[int] = []
    vs: list[int] = []
    for lineno, raw in enumerate(lines, 1):
        s = raw.strip()
        if not s or s.startswith("#"):
            continue
        toks = s.split()
        if len(toks) != 2:
            raise GraphFormatError(f"line {lineno}: expected two vertex ids, got {s!r}")
        try:
            a, b = int(toks[0]), int(toks[1])
        except ValueError:
            raise GraphFormatError(f"line {lineno}: non-integer vertex id in {s!r}") from None
        if a < 0 or b < 0:
            raise GraphFormatError(f"line {lineno}: negative vertex id in {s!r}")
        us.append(a)
        vs.append(b)
    if not us:
        raise GraphFormatError("edge list is empty")
    u = np.array(us, dtype=np.int64)
    v = np.array(vs, dtype=np.int64)
    n = int(max(u.max(), v.max())) + 1
    self_loops = int((u == v).sum())
    keep = u != v
    lo = np.minimum(u[keep], v[keep])
    hi = np.maximum(u[keep], v[keep])
    uniq = np.unique(lo * n + hi) if lo.size else lo
    stats = EdgeListStats(
        edges=int(uniq.size),
        duplicates=int(lo.size - uniq.size),
        self_loops=self_loops,
    )
    g = Graph.from_edges(np.stack([uniq // n, uniq % n], axis=1), n=n)
    return g, stats


def read_edge_list(path: str | Path) -> tuple[Graph, EdgeListStats]:
    with open(path, "r", encoding="utf-8") as f:
        return load_edge_list(f)


def edge_lines(g: Graph) -> Iterator[str]:
    """Canonical serialization: min-id first, lexicographically sorted."""
    for u, v in g.edges():
        yield f"{u} {v}"


def write_edge_list(path: str | Path, g: Graph) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for line in edge_lines(g):
            f.write(line + "\n")


def compact_ids(edges) -> tuple[np.ndarray, np.ndarray]:
    """Relabel arbitrary nonnegative ids to dense 0..k-1.

    Returns (dense_edges, id_map) where id_map[new] = original id; the
    map is sorted so the relabeling is order-preserving.
    """
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    ids = np.unique(edges)
    dense = np.searchsorted(ids, edges)
    return dense, ids


@dataclass
class EgoNetwork:
    """Induced subgraph on a vertex and its neighbors.

    ``vertices`` holds global ids, center first; ``edges_u``/``edges_v``
    hold local indices with edges_u < edges_v.
    """

    center: int
    vertices: np.ndarray
    edges_u: np.ndarray
    edges_v: np.ndarray

    @property
    def n_local(self) -> int:
        return int(self.vertices.shape[0])

    def local_degrees(self) -> np.ndarray:
        both = np.concatenate([self.edges_u, self.edges_v])
        return np.bincount(both, minlength=self.n_local)

    def local_adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n_local)]
        for a, b in zip(self.edges_u.tolist(), self.edges_v.tolist()):
            adj[a].append(b)
            adj[b].append(a)
        for row in adj:
            row.sort()
        return adj


def ego_network(g: Graph, v: int) -> EgoNetwork:
    """Ego network of v: the induced subgraph on {v} and its neighbors."""
    if not 0 <= v < g.n:
        raise ValueError(f"vertex {v} out of range for n={g.n}")
    scratch = np.full(g.n, -1, dtype=np.int32)
    eu, ev = ego_local_edges(g.indptr, g.indices, v, scratch)
    vertices = np.concatenate([[v], g.neighbors(v)]).astype(np.int64)
    return EgoNetwork(center=v, vertices=vertices, edges_u=eu, edges_v=ev)


def local_clustering(g: Graph, v: int) -> float:
    """Fraction of neighbor pairs of v that are themselves connected.

    0 by convention when deg(v) < 2.
    """
    d = g.degree(v)
    if d < 2:
        return 0.0
    scratch = np.full(g.n, -1, dtype=np.int32)
    eu, _ = ego_local_edges(g.indptr, g.indices, v, scratch)
    among = eu.shape[0] - d
    return 2.0 * among / (d * (d - 1))
