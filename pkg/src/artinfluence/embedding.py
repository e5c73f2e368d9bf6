"""The Map of Artists: low-dimensional coordinates from the influence graph.

Shortest paths over the directed influence graph give artist-to-artist
distances; unreachable pairs are replaced by 1.5x the maximum finite entry,
the matrix is symmetrized by averaging, and classical MDS (double centering
plus eigendecomposition) produces the coordinates.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .errors import AllInfinite, InvalidInput
from .influence import InfluenceGraph

INF_REPLACEMENT_FACTOR = 1.5


@dataclass(frozen=True, eq=False)
class ArtistEmbedding:
    """Artist coordinates with style labels and the eigenvalue spectrum.

    Columns of ``coords`` are ordered by descending eigenvalue; the full
    spectrum of the double-centered matrix is kept for diagnostics.
    """

    artist_ids: tuple[str, ...]
    styles: tuple[str, ...]
    coords: np.ndarray
    eigenvalues: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=np.float64).copy()
        c.flags.writeable = False
        object.__setattr__(self, "coords", c)
        e = np.asarray(self.eigenvalues, dtype=np.float64).copy()
        e.flags.writeable = False
        object.__setattr__(self, "eigenvalues", e)
        object.__setattr__(self, "artist_ids", tuple(self.artist_ids))
        object.__setattr__(self, "styles", tuple(self.styles))


def _directed_dijkstra(adj: list[list[tuple[int, float]]], source: int, n: int) -> np.ndarray:
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


def graph_geodesics(graph: InfluenceGraph) -> np.ndarray:
    """All-pairs shortest paths on the directed graph; unreachable pairs stay +inf."""
    w = graph.weights
    n = w.shape[0]
    adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i != j and np.isfinite(w[i, j]):
                adj[i].append((j, float(w[i, j])))
    out = np.empty((n, n))
    for s in range(n):
        out[s] = _directed_dijkstra(adj, s, n)
    return out


def finitize_symmetrize(m: np.ndarray) -> np.ndarray:
    """Replace +inf by 1.5x the max finite entry, then average-symmetrize.

    The diagonal of the result is exactly zero.
    """
    m = np.asarray(m, dtype=np.float64)
    off_diag = ~np.eye(m.shape[0], dtype=bool)
    if not np.isfinite(m[off_diag]).any():
        raise AllInfinite("no finite off-diagonal entry")
    replacement = INF_REPLACEMENT_FACTOR * float(m[np.isfinite(m)].max())
    filled = np.where(np.isfinite(m), m, replacement)
    s = (filled + filled.T) / 2.0
    np.fill_diagonal(s, 0.0)
    return s


def classical_mds(s: np.ndarray, d: int):
    """Classical MDS of a symmetric distance matrix into d dimensions.

    Double-centers the entrywise-squared matrix, keeps the top-d positive
    eigenpairs (coordinates are eigenvectors scaled by sqrt(eigenvalue)),
    pads dimensions with non-positive eigenvalues with zeros, and fixes each
    column's sign so its largest-magnitude entry is positive.

    Returns (coords, eigenvalues) with the full spectrum sorted descending.
    """
    s = np.asarray(s, dtype=np.float64)
    n = s.shape[0]
    if s.shape != (n, n):
        raise InvalidInput(f"expected a square matrix, got {s.shape}")
    if np.abs(s - s.T).max(initial=0.0) > 1e-9:
        raise InvalidInput("matrix is not symmetric within 1e-9")
    if (s < 0).any():
        raise InvalidInput("matrix has negative entries")
    j = np.eye(n) - np.full((n, n), 1.0 / n)
    b = -0.5 * j @ (s**2) @ j
    b = (b + b.T) / 2.0
    evals, evecs = np.linalg.eigh(b)
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    evecs = evecs[:, order]
    coords = np.zeros((n, d))
    for c in range(min(d, n)):
        if evals[c] > 0:
            col = evecs[:, c] * np.sqrt(evals[c])
            if col[np.argmax(np.abs(col))] < 0:
                col = -col
            coords[:, c] = col
    return coords, evals


def map_of_artists(graph: InfluenceGraph, d: int = 3, styles=None) -> ArtistEmbedding:
    """Embed the influence graph: geodesics -> finitize/symmetrize -> MDS."""
    if styles is None:
        styles = {}
    geo = graph_geodesics(graph)
    sym = finitize_symmetrize(geo)
    coords, evals = classical_mds(sym, d)
    labels = tuple(styles.get(a, "") for a in graph.artist_ids)
    return ArtistEmbedding(graph.artist_ids, labels, coords, evals)
