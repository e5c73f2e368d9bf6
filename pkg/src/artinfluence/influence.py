"""Artist-level distances, the influenced-by graph, retrieval and recall.

The directed distance from artist l to artist k is the q-th percentile
(nearest-rank, q in percent) of the point-set distances of l's paintings to
k's painting set. Small q reproduces the minimum-link distance, q=50 the
central-link (median), and q=100 the directed Hausdorff component. The
influenced-by graph keeps the edge l -> k only when l's period ends no
earlier than k's period starts; all other weights are +inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyGroundTruth, EmptySet, InvalidK, InvalidQ
from .model import Dataset, GroundTruthInfluences

Q_GRID_DEFAULT = (1.0, 10.0, 50.0, 90.0, 99.0)
TOP_K_DEFAULT = (5, 10, 15, 20, 25)


@dataclass(frozen=True, eq=False)
class InfluenceGraph:
    """Directed weighted graph over artists; +inf marks impossible edges.

    weights[i, j] is the distance from artist i (potentially influenced) to
    artist j (potential influencer); finite only when i succeeds or is
    contemporary to j. Self-weights are +inf.
    """

    artist_ids: tuple[str, ...]
    weights: np.ndarray
    q: float
    metric: str

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64).copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "artist_ids", tuple(self.artist_ids))

    def index_of(self, artist_id: str) -> int:
        try:
            return self.artist_ids.index(artist_id)
        except ValueError:
            raise KeyError(artist_id) from None


@dataclass(frozen=True)
class RecallResult:
    """Recall@k and the ground-truth pairs that were hits.

    ``infeasible`` lists pairs whose direction the temporal mask forbids;
    they are kept in the denominator but can never be hits.
    """

    recall: float
    hits: tuple[tuple[str, str], ...]
    infeasible: tuple[tuple[str, str], ...]


def point_set_distance(painting: int, painting_set, matrix) -> float:
    """Minimum distance from one painting to any painting of a set."""
    idx = list(painting_set)
    if not idx:
        raise EmptySet("painting set is empty")
    values = matrix.values if hasattr(matrix, "values") else np.asarray(matrix)
    return float(values[painting, idx].min())


def _percentile_rank(n: int, q: float) -> int:
    """Nearest-rank index (1-based) of the q-th percentile of n values."""
    return min(max(int(math.ceil(q * n / 100.0)), 1), n)


def artist_distance_q(set_l, set_k, q: float, matrix) -> float:
    """Directed q-percentile set distance from artist l to artist k.

    Sorts the point-set distances of every painting of l to k's set and
    returns the nearest-rank percentile element.
    """
    if not (0.0 < q <= 100.0):
        raise InvalidQ(f"q must be in (0, 100], got {q}")
    set_l = list(set_l)
    set_k = list(set_k)
    if not set_l or not set_k:
        raise EmptySet("both painting sets must be non-empty")
    values = matrix.values if hasattr(matrix, "values") else np.asarray(matrix)
    s = np.sort(values[np.ix_(set_l, set_k)].min(axis=1))
    return float(s[_percentile_rank(len(set_l), q) - 1])


def hausdorff_distance(set_l, set_k, matrix) -> float:
    """Symmetric Hausdorff diagnostic: max of the two directed q=100 values."""
    return max(artist_distance_q(set_l, set_k, 100.0, matrix), artist_distance_q(set_k, set_l, 100.0, matrix))


def hausdorff_matrix(dataset: Dataset, matrix):
    """Symmetric artist-by-artist Hausdorff diagnostic, ignoring the temporal mask.

    Returned as a distance matrix keyed by artist ids; this is a report, not
    a graph weight.
    """
    from .distances import PaintingDistanceMatrix

    ids = dataset.artist_ids()
    sets = [dataset.paintings_of(a) for a in ids]
    n = len(ids)
    values = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            values[i, j] = values[j, i] = hausdorff_distance(sets[i], sets[j], matrix)
    return PaintingDistanceMatrix(values, "hausdorff-diagnostic", ids)


def build_influence_graph(dataset: Dataset, q: float, matrix) -> InfluenceGraph:
    """Influenced-by graph: q-percentile artist distances under the temporal mask.

    weights[i, j] is finite iff period_end(i) >= period_start(j) and i != j.
    """
    ids = dataset.artist_ids()
    n = len(ids)
    sets = []
    for a in dataset.artists:
        painting_set = dataset.paintings_of(a.artist_id)
        if not painting_set:
            raise EmptySet(f"artist {a.artist_id!r} has no paintings")
        sets.append(painting_set)
    w = np.full((n, n), np.inf)
    for i, ai in enumerate(dataset.artists):
        for j, aj in enumerate(dataset.artists):
            if i == j or ai.period_end < aj.period_start:
                continue
            w[i, j] = artist_distance_q(sets[i], sets[j], q, matrix)
    metric = getattr(matrix, "metric", "euclidean")
    return InfluenceGraph(ids, w, q, metric)


def top_k_influences(graph: InfluenceGraph, artist_id: str, k: int) -> list[tuple[str, float]]:
    """The k finite-weight potential influencers of an artist, nearest first.

    Ties break by artist id; fewer than k entries are returned when fewer
    finite edges exist.
    """
    if k < 1:
        raise InvalidK(f"k must be >= 1, got {k}")
    i = graph.index_of(artist_id)
    row = graph.weights[i]
    finite = [(float(row[j]), graph.artist_ids[j]) for j in range(len(row)) if np.isfinite(row[j])]
    finite.sort()
    return [(aid, w) for w, aid in finite[:k]]


def recall_at_k(graph: InfluenceGraph, ground_truth: GroundTruthInfluences, k: int) -> RecallResult:
    """Fraction of ground-truth pairs whose influencer is in the top-k list."""
    if not ground_truth.pairs:
        raise EmptyGroundTruth("ground truth has no pairs")
    hits: list[tuple[str, str]] = []
    infeasible: list[tuple[str, str]] = []
    for influenced, influencer in ground_truth.pairs:
        i = graph.index_of(influenced)
        j = graph.index_of(influencer)
        if not np.isfinite(graph.weights[i, j]):
            infeasible.append((influenced, influencer))
        retrieved = {aid for aid, _ in top_k_influences(graph, influenced, k)}
        if influencer in retrieved:
            hits.append((influenced, influencer))
    return RecallResult(len(hits) / len(ground_truth.pairs), tuple(hits), tuple(infeasible))


@dataclass(frozen=True)
class TopKTable:
    """Flattened top-k suggestions: (artist_id, rank, influencer_id, weight)."""

    k: int
    rows: tuple[tuple[str, int, str, float], ...]


def top_k_table(graph: InfluenceGraph, k: int) -> TopKTable:
    """Top-k suggested influencers for every artist, in graph order."""
    rows: list[tuple[str, int, str, float]] = []
    for artist_id in graph.artist_ids:
        for rank, (influencer, weight) in enumerate(top_k_influences(graph, artist_id, k), start=1):
            rows.append((artist_id, rank, influencer, weight))
    return TopKTable(int(k), tuple(rows))


@dataclass(frozen=True, eq=False)
class RecallTable:
    """Recall percentages over a (q, k) grid, rows q and columns k."""

    qs: tuple[float, ...]
    ks: tuple[int, ...]
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "qs", tuple(float(q) for q in self.qs))
        object.__setattr__(self, "ks", tuple(int(k) for k in self.ks))


def recall_table(
    dataset: Dataset,
    matrix,
    ground_truth: GroundTruthInfluences,
    qs=Q_GRID_DEFAULT,
    ks=TOP_K_DEFAULT,
) -> RecallTable:
    """Recall@k (percent) for every q in ``qs`` and k in ``ks``."""
    values = np.zeros((len(qs), len(ks)))
    for r, q in enumerate(qs):
        graph = build_influence_graph(dataset, q, matrix)
        for c, k in enumerate(ks):
            values[r, c] = 100.0 * recall_at_k(graph, ground_truth, k).recall
    return RecallTable(tuple(qs), tuple(ks), values)
