"""Shared synthetic-data builders and independent oracles."""

from __future__ import annotations

import numpy as np
import pytest

from artinfluence.model import ArtistRecord, Dataset, PaintingRecord


def make_dataset(spec, dim=3, noise=0.5, seed=0):
    """Build a dataset from (artist_id, period, style, center, n_paintings) tuples.

    Painting features are drawn around each artist's cluster center.
    """
    rng = np.random.default_rng(seed)
    artists, paintings = [], []
    for artist_id, (start, end), style, center, n in spec:
        artists.append(ArtistRecord(artist_id, f"Artist {artist_id}", start, end, style))
        center = np.resize(np.asarray(center, dtype=float), dim)
        for i in range(n):
            features = center + rng.normal(scale=noise, size=dim)
            paintings.append(PaintingRecord(f"{artist_id}_{i}", artist_id, f"Work {i}", 1900, features))
    return Dataset.build(artists, paintings)


def two_artist_dataset():
    return make_dataset(
        [
            ("old", (1800, 1850), "Old", [0.0, 0.0], 4),
            ("new", (1900, 1950), "New", [8.0, 8.0], 4),
        ],
        dim=2,
        noise=0.3,
        seed=1,
    )


def bellman_ford(n, edges, source):
    """Reference all-targets shortest paths; edges are (u, v, w) directed."""
    dist = np.full(n, np.inf)
    dist[source] = 0.0
    for _ in range(n - 1):
        changed = False
        for u, v, w in edges:
            if dist[u] + w < dist[v]:
                dist[v] = dist[u] + w
                changed = True
        if not changed:
            break
    return dist


def undirected_edges(graph):
    """Expand a NeighborGraph's edge list into both directed orientations."""
    out = []
    for i, j, w in graph.edges:
        out.append((i, j, w))
        out.append((j, i, w))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
