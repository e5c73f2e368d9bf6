"""Visual-word codebook construction and per-painting BoW histograms.

Pooled local descriptors are clustered with seeded k-means++ / Lloyd
iteration; each painting's descriptors are then quantized to their nearest
codebook word and summarized as a histogram.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InsufficientData

DEFAULT_CODEBOOK_SIZE = 600
DEFAULT_MAX_ITER = 100
DEFAULT_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class Codebook:
    """K centroid vectors over local-descriptor space, plus the seed used.

    ``inertia_history`` records the within-cluster sum of squares after each
    Lloyd assignment step (diagnostic only, not part of the persisted state).
    """

    centroids: np.ndarray
    seed: int
    inertia_history: tuple[float, ...] = field(default=())

    def __post_init__(self):
        c = np.asarray(self.centroids, dtype=np.float64).copy()
        c.flags.writeable = False
        object.__setattr__(self, "centroids", c)

    @property
    def k(self) -> int:
        return int(self.centroids.shape[0])

    @property
    def width(self) -> int:
        return int(self.centroids.shape[1])


@dataclass(frozen=True, eq=False)
class BowHistogram:
    """Word counts of one painting and, when non-empty, their normalization."""

    counts: np.ndarray
    normalized: np.ndarray | None

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64).copy()
        c.flags.writeable = False
        object.__setattr__(self, "counts", c)
        if self.normalized is not None:
            n = np.asarray(self.normalized, dtype=np.float64).copy()
            n.flags.writeable = False
            object.__setattr__(self, "normalized", n)

    @property
    def is_empty(self) -> bool:
        return self.normalized is None


def _sq_dists_to(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances, points x centroids, via explicit diffs."""
    out = np.empty((points.shape[0], centroids.shape[0]))
    for c in range(centroids.shape[0]):
        diff = points - centroids[c]
        out[:, c] = np.einsum("ij,ij->i", diff, diff)
    return out


def _kmeanspp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]))
    first = int(rng.integers(n))
    centroids[0] = points[first]
    closest_sq = _sq_dists_to(points, centroids[:1])[:, 0]
    for c in range(1, k):
        total = closest_sq.sum()
        if total <= 0.0:
            # all remaining points coincide with a centroid; pick lowest index
            idx = int(np.argmin(closest_sq))
        else:
            idx = int(rng.choice(n, p=closest_sq / total))
        centroids[c] = points[idx]
        closest_sq = np.minimum(closest_sq, _sq_dists_to(points, centroids[c : c + 1])[:, 0])
    return centroids


def kmeans_codebook(
    descriptors,
    k: int,
    seed: int,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
) -> Codebook:
    """Cluster pooled descriptors into a k-word codebook.

    k-means++ seeding followed by Lloyd iteration, stopping when the relative
    inertia decrease drops below ``tol`` or after ``max_iter`` rounds. Empty
    clusters are re-seeded with the point currently farthest from its
    centroid. Deterministic for a fixed seed.
    """
    points = np.asarray(descriptors, dtype=np.float64)
    if points.ndim != 2:
        raise DimensionMismatch(f"descriptors must be 2-D, got shape {points.shape}")
    n = points.shape[0]
    if k < 1:
        raise InsufficientData(f"k must be >= 1, got {k}")
    if n < k:
        raise InsufficientData(f"{n} descriptors < k={k}")

    rng = np.random.default_rng(seed)
    centroids = _kmeanspp_init(points, k, rng)
    history: list[float] = []
    prev_inertia = np.inf
    for _ in range(max_iter):
        sq = _sq_dists_to(points, centroids)
        assign = np.argmin(sq, axis=1)  # ties go to the lowest centroid index
        inertia = float(sq[np.arange(n), assign].sum())
        if history and inertia > history[-1]:
            raise AssertionError("k-means inertia increased across an iteration")
        history.append(inertia)

        new_centroids = centroids.copy()
        empties = []
        for c in range(k):
            members = np.where(assign == c)[0]
            if members.size:
                new_centroids[c] = points[members].mean(axis=0)
            else:
                empties.append(c)
        if empties:
            point_sq = sq[np.arange(n), assign]
            order = np.lexsort((np.arange(n), -point_sq))  # farthest first, ties by index
            taken = 0
            for c in empties:
                new_centroids[c] = points[order[taken]]
                taken += 1
        centroids = new_centroids

        if prev_inertia < np.inf:
            decrease = prev_inertia - inertia
            if prev_inertia > 0 and decrease / prev_inertia < tol:
                break
            if prev_inertia == 0.0:
                break
        prev_inertia = inertia

    _check_distinct(centroids)
    return Codebook(centroids, seed, tuple(history))


def _check_distinct(centroids: np.ndarray) -> None:
    for a in range(centroids.shape[0]):
        diff = centroids[a + 1 :] - centroids[a]
        if diff.size and (np.abs(diff).max(axis=1) <= 1e-12).any():
            raise InsufficientData("k-means produced duplicate centroids; fewer distinct descriptors than k")


def quantize(descriptors, codebook: Codebook) -> BowHistogram:
    """Assign each descriptor to its nearest codebook word (ties: lowest index)."""
    points = np.asarray(descriptors, dtype=np.float64)
    if points.size == 0:
        counts = np.zeros(codebook.k, dtype=np.int64)
        return BowHistogram(counts, None)
    if points.ndim != 2 or points.shape[1] != codebook.width:
        raise DimensionMismatch(f"descriptor width {points.shape[-1] if points.ndim else 0} != codebook width {codebook.width}")
    assign = np.argmin(_sq_dists_to(points, codebook.centroids), axis=1)
    counts = np.bincount(assign, minlength=codebook.k).astype(np.int64)
    return BowHistogram(counts, counts / counts.sum())
