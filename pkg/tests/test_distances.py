import numpy as np
import pytest

from artinfluence.distances import (
    build_knn_graph,
    euclidean_all_pairs,
    geodesic_all_pairs,
    manifold_all_pairs,
)
from artinfluence.errors import InvalidK
from artinfluence.model import ArtistRecord, Dataset, PaintingRecord
from conftest import bellman_ford, make_dataset, undirected_edges


def points_dataset(points):
    artists = [ArtistRecord("a", "A", 1800, 1900, "S")]
    paintings = [PaintingRecord(f"p{i}", "a", "t", None, p) for i, p in enumerate(points)]
    return Dataset.build(artists, paintings)


def test_identical_features_have_zero_distance():
    ds = points_dataset([[1.0, 2.0], [1.0, 2.0]])
    assert euclidean_all_pairs(ds).values[0, 1] == 0.0


def test_three_four_five_triangle():
    ds = points_dataset([[0.0, 0.0], [3.0, 4.0]])
    assert euclidean_all_pairs(ds).values[0, 1] == 5.0


def test_euclidean_matches_naive_oracle(rng):
    points = rng.normal(size=(10, 2569))
    ds = points_dataset(points)
    got = euclidean_all_pairs(ds).values
    # independent oracle: naive double loop over explicit sums of squares
    for i in range(10):
        for j in range(10):
            expected = np.sqrt(sum((points[i, d] - points[j, d]) ** 2 for d in range(points.shape[1])))
            if expected == 0.0:
                assert got[i, j] == 0.0
            else:
                assert abs(got[i, j] - expected) <= 1e-12 * expected


def test_euclidean_matrix_shape_invariants(rng):
    ds = points_dataset(rng.normal(size=(12, 4)))
    m = euclidean_all_pairs(ds)
    assert np.array_equal(m.values, m.values.T)
    assert np.all(np.diag(m.values) == 0.0)
    assert np.all(m.values >= 0.0)


def test_collinear_points_knn_connected():
    ds = points_dataset([[0.0], [1.0], [2.0]])
    g = build_knn_graph(ds, 1, euclidean_all_pairs(ds))
    assert {(i, j) for i, j, _ in g.edges} == {(0, 1), (1, 2)}
    assert g.rule == "symmetric-knn"


def test_two_blobs_bridged_by_mst_edge(rng):
    blob_a = rng.normal(scale=0.5, size=(5, 2))
    blob_b = rng.normal(scale=0.5, size=(5, 2)) + 100.0
    points = np.vstack([blob_a, blob_b])
    ds = points_dataset(points)
    e = euclidean_all_pairs(ds)
    g = build_knn_graph(ds, 1, e)
    cross = [(i, j, w) for i, j, w in g.edges if (i < 5) != (j < 5)]
    # oracle: exhaustive enumeration of the closest cross-blob pair
    best = min(((e.values[i, j], i, j) for i in range(5) for j in range(5, 10)))
    assert len(cross) == 1
    assert (cross[0][0], cross[0][1]) == (best[1], best[2])
    assert g.rule == "symmetric-knn+mst-bridge"


def test_full_k_gives_complete_graph(rng):
    ds = points_dataset(rng.normal(size=(6, 3)))
    g = build_knn_graph(ds, 5, euclidean_all_pairs(ds))
    assert len(g.edges) == 15


def test_invalid_k_rejected(rng):
    ds = points_dataset(rng.normal(size=(4, 2)))
    e = euclidean_all_pairs(ds)
    with pytest.raises(InvalidK):
        build_knn_graph(ds, 4, e)
    with pytest.raises(InvalidK):
        build_knn_graph(ds, 0, e)


def test_path_graph_geodesics():
    ds = points_dataset([[0.0], [1.0], [2.0]])
    g = build_knn_graph(ds, 1, euclidean_all_pairs(ds))
    m = geodesic_all_pairs(g)
    assert m.values[0, 2] == 2.0


def test_complete_graph_geodesics_equal_euclidean(rng):
    ds = points_dataset(rng.normal(size=(8, 3)))
    e = euclidean_all_pairs(ds)
    g = build_knn_graph(ds, 7, e)
    m = geodesic_all_pairs(g)
    assert np.abs(m.values - e.values).max() <= 1e-9


def test_geodesics_match_bellman_ford(rng):
    for _ in range(5):
        ds = points_dataset(rng.normal(size=(30, 3)))
        g = build_knn_graph(ds, 3, euclidean_all_pairs(ds))
        m = geodesic_all_pairs(g)
        edges = undirected_edges(g)
        for s in range(0, 30, 7):
            expected = bellman_ford(30, edges, s)
            assert np.abs(m.values[s] - expected).max() <= 1e-12


def test_manifold_dominates_euclidean(rng):
    ds = points_dataset(rng.normal(size=(20, 4)))
    e = euclidean_all_pairs(ds)
    m = manifold_all_pairs(ds, 3, e)
    assert np.all(m.values >= e.values - 1e-9)


def test_geodesics_shrink_as_k_grows(rng):
    ds = points_dataset(rng.normal(size=(15, 3)))
    e = euclidean_all_pairs(ds)
    previous = None
    for k in (2, 4, 8, 14):
        m = manifold_all_pairs(ds, k, e).values
        if previous is not None:
            assert np.all(m <= previous + 1e-9)
        previous = m


def test_manifold_matrix_invariants(rng):
    ds = make_dataset([("a", (1800, 1900), "S", [0.0, 0.0], 10)], dim=2, seed=3)
    m = manifold_all_pairs(ds, 3)
    v = m.values
    assert np.array_equal(v, v.T)
    assert np.all(np.diag(v) == 0.0)
    # triangle inequality for the graph metric
    n = v.shape[0]
    for i in range(n):
        for j in range(n):
            for k in range(n):
                assert v[i, k] <= v[i, j] + v[j, k] + 1e-9
