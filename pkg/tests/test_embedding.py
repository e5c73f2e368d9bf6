import numpy as np
import pytest
from scipy.linalg import orthogonal_procrustes

from artinfluence.embedding import (
    classical_mds,
    finitize_symmetrize,
    graph_geodesics,
    map_of_artists,
)
from artinfluence.errors import AllInfinite, InvalidInput
from artinfluence.influence import InfluenceGraph
from conftest import bellman_ford


def graph(ids, weights):
    return InfluenceGraph(ids, weights, 50.0, "euclidean")


def procrustes_rms(recovered, original):
    """Alignment oracle: center both, find the best orthogonal map, report RMS."""
    a = recovered - recovered.mean(axis=0)
    b = original - original.mean(axis=0)
    r, _ = orthogonal_procrustes(a, b)
    return np.sqrt(((a @ r - b) ** 2).sum() / len(a))


def euclidean_matrix(points):
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt((diff**2).sum(axis=2))


def test_mutual_pair_geodesics():
    w = np.array([[np.inf, 1.0], [1.0, np.inf]])
    m = graph_geodesics(graph(("a", "b"), w))
    assert m[0, 1] == 1.0 and m[1, 0] == 1.0
    assert m[0, 0] == 0.0


def test_directed_chain_geodesics():
    w = np.full((3, 3), np.inf)
    w[0, 1] = w[1, 2] = 1.0
    m = graph_geodesics(graph(("a", "b", "c"), w))
    assert m[0, 2] == 2.0
    assert np.isinf(m[2, 0])


def test_geodesics_match_bellman_ford(rng):
    for _ in range(5):
        n = 15
        w = rng.random((n, n)) * 4
        w[rng.random((n, n)) < 0.5] = np.inf
        np.fill_diagonal(w, np.inf)
        m = graph_geodesics(graph(tuple(f"a{i}" for i in range(n)), w))
        edges = [(i, j, w[i, j]) for i in range(n) for j in range(n) if i != j and np.isfinite(w[i, j])]
        for s in range(n):
            expected = bellman_ford(n, edges, s)
            finite = np.isfinite(expected)
            assert np.array_equal(np.isfinite(m[s]), finite)
            assert np.abs(m[s][finite] - expected[finite]).max(initial=0.0) <= 1e-12


def test_finitize_leaves_finite_symmetric_matrix_unchanged(rng):
    m = rng.random((5, 5))
    m = (m + m.T) / 2
    np.fill_diagonal(m, 0.0)
    assert np.array_equal(finitize_symmetrize(m), m)


def test_finitize_replaces_inf_with_factor():
    m = np.array([[0.0, 10.0, np.inf], [10.0, 0.0, 4.0], [np.inf, 4.0, 0.0]])
    s = finitize_symmetrize(m)
    assert s[0, 2] == 15.0 and s[2, 0] == 15.0


def test_finitize_symmetrizes_directed_matrix(rng):
    m = rng.random((6, 6)) * 9
    np.fill_diagonal(m, 0.0)
    s = finitize_symmetrize(m)
    assert np.array_equal(s, s.T)
    assert np.all(np.diag(s) == 0.0)
    for i in range(6):
        for j in range(6):
            assert s[i, j] == (m[i, j] + m[j, i]) / 2.0


def test_finitize_all_infinite_raises():
    m = np.full((3, 3), np.inf)
    np.fill_diagonal(m, 0.0)
    with pytest.raises(AllInfinite):
        finitize_symmetrize(m)


def test_mds_recovers_unit_square():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    s = euclidean_matrix(pts)
    coords, evals = classical_mds(s, 2)
    recovered = euclidean_matrix(coords)
    assert np.abs(recovered - s).max() <= 1e-9
    assert np.all(np.diff(evals) <= 1e-12)


def test_mds_zero_matrix_gives_zero_coords():
    coords, _ = classical_mds(np.zeros((4, 4)), 3)
    assert np.array_equal(coords, np.zeros((4, 3)))


def test_mds_procrustes_recovery(rng):
    pts = rng.normal(size=(20, 3))
    coords, _ = classical_mds(euclidean_matrix(pts), 3)
    assert procrustes_rms(coords, pts) < 1e-6


def test_mds_rejects_bad_input(rng):
    with pytest.raises(InvalidInput):
        classical_mds(np.array([[0.0, 1.0], [2.0, 0.0]]), 2)
    with pytest.raises(InvalidInput):
        classical_mds(np.array([[0.0, -1.0], [-1.0, 0.0]]), 2)
    with pytest.raises(InvalidInput):
        classical_mds(np.zeros((2, 3)), 2)


def test_mds_sign_convention_is_deterministic(rng):
    pts = rng.normal(size=(9, 3))
    s = euclidean_matrix(pts)
    coords1, _ = classical_mds(s, 3)
    coords2, _ = classical_mds(s, 3)
    assert np.array_equal(coords1, coords2)
    for c in range(3):
        col = coords1[:, c]
        assert col[np.argmax(np.abs(col))] >= 0.0


def test_embedded_sq_distances_bounded_by_twice_total_variance(rng):
    # the factor 2 is tight: two points at distance d embed at +/- d/2,
    # so the max squared distance d^2 equals 2 * sum(positive eigenvalues)
    pts = rng.normal(size=(10, 4))
    coords, evals = classical_mds(euclidean_matrix(pts), 4)
    total = evals[evals > 0].sum()
    max_sq = (euclidean_matrix(coords) ** 2).max()
    assert max_sq <= 2.0 * total + 1e-9


def test_map_two_artists_mutual_weight():
    w = np.array([[np.inf, 1.0], [1.0, np.inf]])
    emb = map_of_artists(graph(("a", "b"), w), 3, {"a": "S1", "b": "S2"})
    d = np.abs(emb.coords[0] - emb.coords[1])
    assert abs(d[0] - 1.0) <= 1e-9
    assert np.all(emb.coords[:, 1:] == 0.0)
    assert emb.styles == ("S1", "S2")


def test_map_separates_planted_clusters(rng):
    n = 10
    w = np.full((n, n), 10.0)
    for i in range(n):
        for j in range(n):
            if (i < 5) == (j < 5):
                w[i, j] = 1.0
    np.fill_diagonal(w, np.inf)
    emb = map_of_artists(graph(tuple(f"a{i}" for i in range(n)), w), 3)
    d = euclidean_matrix(emb.coords)
    intra = [d[i, j] for i in range(n) for j in range(n) if i != j and (i < 5) == (j < 5)]
    inter = [d[i, j] for i in range(n) for j in range(n) if (i < 5) != (j < 5)]
    assert np.mean(inter) > np.mean(intra)
