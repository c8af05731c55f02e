"""Sequence similarity network: exact K-nearest-neighbor graph over features.

Nodes are sequences; an (undirected, unweighted) edge joins u and v when
either is among the other's K nearest neighbors in Euclidean k-mer space
(union symmetrization; mutual mode available). Neighbor search is exact
brute force, blocked over row tiles; distance ties break toward the smaller
index so results are deterministic everywhere.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np
from scipy import sparse

from .errors import NeighborCountError, ParseError
from .featurize import FeatureMatrix

_TILE_ROWS = 512


@dataclass(frozen=True)
class SimilarityNetwork:
    """Undirected simple graph with sorted neighbor lists and node metadata."""

    neighbors: tuple[tuple[int, ...], ...]
    node_ids: tuple[str, ...]
    labels: Optional[tuple[Optional[str], ...]] = None

    def __post_init__(self):
        if len(self.node_ids) != len(self.neighbors):
            raise ValueError("node_ids length does not match node count")
        if self.labels is not None and len(self.labels) != len(self.neighbors):
            raise ValueError("labels length does not match node count")

    @property
    def n(self) -> int:
        return len(self.neighbors)

    @property
    def num_edges(self) -> int:
        return sum(len(nb) for nb in self.neighbors) // 2

    def degree(self, i: int) -> int:
        return len(self.neighbors[i])

    def edges(self) -> Iterator[tuple[int, int]]:
        for u, nbrs in enumerate(self.neighbors):
            for v in nbrs:
                if u < v:
                    yield (u, v)

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.neighbors[u]
        pos = np.searchsorted(nbrs, v)
        return pos < len(nbrs) and nbrs[pos] == v

    def neighbor_sets(self) -> list[set]:
        return [set(nb) for nb in self.neighbors]

    def adjacency_matrix(self) -> np.ndarray:
        adj = np.zeros((self.n, self.n), dtype=np.float64)
        for u, v in self.edges():
            adj[u, v] = adj[v, u] = 1.0
        return adj


def network_from_edges(
    n: int,
    edges: Iterable[tuple[int, int]],
    node_ids: Optional[Sequence[str]] = None,
    labels: Optional[Sequence[Optional[str]]] = None,
) -> SimilarityNetwork:
    """Build a network from an edge list, deduplicating and sorting neighbors."""
    nbrs: list[set] = [set() for _ in range(n)]
    for u, v in edges:
        if u == v:
            continue
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
        nbrs[u].add(v)
        nbrs[v].add(u)
    ids = tuple(node_ids) if node_ids is not None else tuple(str(i) for i in range(n))
    labs = None
    if labels is not None and any(l is not None for l in labels):
        labs = tuple(labels)
    return SimilarityNetwork(tuple(tuple(sorted(s)) for s in nbrs), ids, labs)


def _feature_array(features):
    """Accept FeatureMatrix (sparse path) or an array; return (X, squared norms)."""
    if isinstance(features, FeatureMatrix):
        x = features.to_csr()
        sq = np.asarray(x.multiply(x).sum(axis=1)).ravel()
        return x, sq
    x = np.asarray(features, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    return x, np.einsum("ij,ij->i", x, x)


def _knn_tile(x, sq, start, stop, k):
    """Nearest-neighbor lists for rows [start, stop); ties break to lower index."""
    gram = x[start:stop] @ x.T
    if sparse.issparse(gram):
        gram = gram.toarray()
    d2 = sq[start:stop, None] + sq[None, :] - 2.0 * gram
    rows = np.arange(start, stop)
    d2[np.arange(stop - start), rows] = np.inf
    order = np.argsort(d2, axis=1, kind="stable")
    return order[:, :k]


def knn_query(features, i: int, k: int) -> list[int]:
    """The k indices nearest to row i, ordered by (distance, index)."""
    x, sq = _feature_array(features)
    n = x.shape[0]
    if not 1 <= k <= n - 1:
        raise NeighborCountError(f"K={k} out of range for n={n}")
    return [int(j) for j in _knn_tile(x, sq, i, i + 1, k)[0]]


def build_ssn(
    features,
    k: int = 20,
    labels: Optional[Sequence[Optional[str]]] = None,
    node_ids: Optional[Sequence[str]] = None,
    mode: str = "union",
) -> SimilarityNetwork:
    """Exact KNN graph over feature rows. Default K=20.

    ``mode="union"`` keeps an edge when either endpoint lists the other
    (guaranteeing min degree >= min(K, n-1)); ``mode="mutual"`` requires both.
    """
    if mode not in ("union", "mutual"):
        raise ValueError(f"unknown symmetrization mode {mode!r}")
    x, sq = _feature_array(features)
    n = x.shape[0]
    if n < 2:
        raise NeighborCountError(f"need at least 2 rows, got {n}")
    if not 1 <= k <= n - 1:
        raise NeighborCountError(f"K={k} out of range for n={n}")

    knn_lists = np.empty((n, k), dtype=np.int64)
    for start in range(0, n, _TILE_ROWS):
        stop = min(start + _TILE_ROWS, n)
        knn_lists[start:stop] = _knn_tile(x, sq, start, stop, k)

    edges = []
    if mode == "union":
        for i in range(n):
            for j in knn_lists[i]:
                edges.append((i, int(j)))
    else:
        sets = [set(int(j) for j in knn_lists[i]) for i in range(n)]
        for i in range(n):
            for j in knn_lists[i]:
                if i in sets[int(j)]:
                    edges.append((i, int(j)))
    return network_from_edges(n, edges, node_ids=node_ids, labels=labels)


def connected_components(graph: SimilarityNetwork) -> np.ndarray:
    """Component id per node; ids dense, ordered by smallest contained index."""
    comp = np.full(graph.n, -1, dtype=np.int64)
    cid = 0
    for root in range(graph.n):
        if comp[root] >= 0:
            continue
        stack = [root]
        comp[root] = cid
        while stack:
            u = stack.pop()
            for v in graph.neighbors[u]:
                if comp[v] < 0:
                    comp[v] = cid
                    stack.append(v)
        cid += 1
    return comp


def subgraph(graph: SimilarityNetwork, nodes: Sequence[int]) -> SimilarityNetwork:
    """Induced subgraph with nodes renumbered in the given order."""
    index = {int(v): i for i, v in enumerate(nodes)}
    edges = [
        (index[u], index[v])
        for u, v in graph.edges()
        if u in index and v in index
    ]
    ids = tuple(graph.node_ids[v] for v in nodes)
    labs = tuple(graph.labels[v] for v in nodes) if graph.labels else None
    return network_from_edges(len(nodes), edges, node_ids=ids, labels=labs)


def _default_nodes_path(edges_path) -> str:
    return str(edges_path) + ".nodes.csv"


def save_graph(graph: SimilarityNetwork, edges_path, nodes_path=None) -> None:
    """Write the tab-separated edge list (u < v) and the node attribute CSV."""
    if nodes_path is None:
        nodes_path = _default_nodes_path(edges_path)
    with open(edges_path, "w") as fh:
        for u, v in graph.edges():
            fh.write(f"{u}\t{v}\n")
    with open(nodes_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "id", "label"])
        for i in range(graph.n):
            label = graph.labels[i] if graph.labels else None
            writer.writerow([i, graph.node_ids[i], label if label is not None else ""])


def load_graph(edges_path, nodes_path=None) -> SimilarityNetwork:
    """Re-import a graph written by :func:`save_graph`; exact round trip."""
    if nodes_path is None:
        nodes_path = _default_nodes_path(edges_path)
    ids: list[str] = []
    labels: list[Optional[str]] = []
    with open(nodes_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:3]] != ["index", "id", "label"]:
            raise ParseError(f"expected 'index,id,label' header in {nodes_path}")
        for row in reader:
            if not row:
                continue
            if len(row) < 3 or int(row[0]) != len(ids):
                raise ParseError(f"bad node row {row!r} in {nodes_path}")
            ids.append(row[1])
            labels.append(row[2] or None)
    edges = []
    with open(edges_path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(f"expected 'u\\tv' got {line!r}", line=lineno)
            edges.append((int(parts[0]), int(parts[1])))
    return network_from_edges(len(ids), edges, node_ids=ids, labels=labels)
