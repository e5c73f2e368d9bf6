"""Pairwise painting dissimilarities: Euclidean and graph-geodesic.

The geodesic metric approximates distances along the manifold of paintings:
a k-nearest-neighbor graph weighted by Euclidean distances is built over all
paintings, and shortest-path lengths on that graph give the distance.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .errors import DisconnectedGraph, InvalidK
from .model import Dataset

EUCLIDEAN = "euclidean"
MANIFOLD = "manifold"


@dataclass(frozen=True, eq=False)
class PaintingDistanceMatrix:
    """Symmetric N x N distance matrix over paintings, with id order."""

    values: np.ndarray
    metric: str
    ids: tuple[str, ...]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "ids", tuple(self.ids))


@dataclass(frozen=True, eq=False)
class NeighborGraph:
    """Undirected weighted neighbor graph over painting indices.

    ``edges`` holds (i, j, weight) with i < j; weights are the Euclidean
    distances between the endpoints. ``rule`` documents the construction.
    """

    n_nodes: int
    k: int
    rule: str
    edges: tuple[tuple[int, int, float], ...]
    ids: tuple[str, ...]

    def adjacency(self) -> list[list[tuple[int, float]]]:
        adj: list[list[tuple[int, float]]] = [[] for _ in range(self.n_nodes)]
        for i, j, w in self.edges:
            adj[i].append((j, w))
            adj[j].append((i, w))
        return adj


def euclidean_all_pairs(dataset: Dataset) -> PaintingDistanceMatrix:
    """Exact Euclidean distances d(i, j) = ||f_i - f_j||_2 for all pairs.

    Computed rowwise from explicit differences (no Gram-matrix shortcut, so
    no cancellation error) and mirrored for exact symmetry.
    """
    feats = dataset.features_matrix()
    n = feats.shape[0]
    d = np.zeros((n, n))
    for i in range(n):
        diff = feats[i + 1 :] - feats[i]
        row = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        d[i, i + 1 :] = row
        d[i + 1 :, i] = row
    return PaintingDistanceMatrix(d, EUCLIDEAN, [p.painting_id for p in dataset.paintings])


def _components(n: int, adj: list[list[tuple[int, float]]]) -> np.ndarray:
    comp = np.full(n, -1, dtype=int)
    c = 0
    for start in range(n):
        if comp[start] >= 0:
            continue
        stack = [start]
        comp[start] = c
        while stack:
            u = stack.pop()
            for v, _ in adj[u]:
                if comp[v] < 0:
                    comp[v] = c
                    stack.append(v)
        c += 1
    return comp


def _mst_edges(dist: np.ndarray) -> list[tuple[int, int]]:
    """Prim's MST over the complete graph given by a distance matrix."""
    n = dist.shape[0]
    in_tree = np.zeros(n, dtype=bool)
    best = np.full(n, np.inf)
    best_from = np.full(n, -1, dtype=int)
    in_tree[0] = True
    best[:] = dist[0]
    best_from[:] = 0
    edges: list[tuple[int, int]] = []
    for _ in range(n - 1):
        cand = np.where(~in_tree)[0]
        u = cand[np.lexsort((cand, best[cand]))[0]]  # ties by lower index
        edges.append((int(min(best_from[u], u)), int(max(best_from[u], u))))
        in_tree[u] = True
        better = dist[u] < best
        better &= ~in_tree
        best[better] = dist[u][better]
        best_from[better] = u
    return edges


def build_knn_graph(dataset: Dataset, k: int, euclidean: PaintingDistanceMatrix) -> NeighborGraph:
    """Symmetric kNN graph with MST augmentation for connectivity.

    An edge (i, j) exists when j is among i's k nearest neighbors or vice
    versa; distance ties break toward the lower painting index. If the
    resulting graph is disconnected, the minimum-spanning-tree edges (over
    Euclidean distances) that bridge distinct components are added.
    """
    n = dataset.n_paintings
    if k < 1 or k >= n:
        raise InvalidK(f"k must satisfy 1 <= k < n_paintings, got k={k}, n={n}")
    d = euclidean.values
    pairs: set[tuple[int, int]] = set()
    for i in range(n):
        order = np.lexsort((np.arange(n), d[i]))
        picked = 0
        for j in order:
            if j == i:
                continue
            pairs.add((min(i, int(j)), max(i, int(j))))
            picked += 1
            if picked == k:
                break
    edges = [(i, j, float(d[i, j])) for i, j in sorted(pairs)]
    rule = "symmetric-knn"

    adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for i, j, w in edges:
        adj[i].append((j, w))
        adj[j].append((i, w))
    comp = _components(n, adj)
    if comp.max() > 0:
        rule = "symmetric-knn+mst-bridge"
        for i, j in _mst_edges(d):
            if comp[i] != comp[j]:
                edges.append((i, j, float(d[i, j])))
                old, new = comp[j], comp[i]
                comp[comp == old] = new
        edges.sort()
    return NeighborGraph(n, k, rule, tuple(edges), euclidean.ids)


def _dijkstra(adj: list[list[tuple[int, float]]], source: int, n: int) -> np.ndarray:
    dist = np.full(n, np.inf)
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        du, u = heapq.heappop(heap)
        if du > dist[u]:
            continue
        for v, w in adj[u]:
            alt = du + w
            if alt < dist[v]:
                dist[v] = alt
                heapq.heappush(heap, (alt, v))
    return dist


def geodesic_all_pairs(graph: NeighborGraph) -> PaintingDistanceMatrix:
    """All-pairs shortest paths on the neighbor graph (Dijkstra per source).

    The graph is undirected, so the result is symmetric up to float rounding;
    the elementwise minimum of both directions is taken to make it exact.
    """
    n = graph.n_nodes
    adj = graph.adjacency()
    m = np.empty((n, n))
    for s in range(n):
        m[s] = _dijkstra(adj, s, n)
    if np.isinf(m).any():
        raise DisconnectedGraph("neighbor graph is not connected")
    m = np.minimum(m, m.T)
    np.fill_diagonal(m, 0.0)
    return PaintingDistanceMatrix(m, MANIFOLD, graph.ids)


def manifold_all_pairs(dataset: Dataset, k: int, euclidean: PaintingDistanceMatrix | None = None) -> PaintingDistanceMatrix:
    """Convenience composition: Euclidean -> kNN graph -> geodesics."""
    if euclidean is None:
        euclidean = euclidean_all_pairs(dataset)
    graph = build_knn_graph(dataset, k, euclidean)
    return geodesic_all_pairs(graph)
