"""Core domain types: paintings, artists, datasets, ground-truth influences.

All types are immutable after construction; feature arrays are stored as
read-only float64 numpy arrays so they can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _frozen_f64(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class PaintingRecord:
    """One artwork: identifiers, artist linkage and its feature vector.

    The optional year is carried for reporting only; no computation in this
    package reads it.
    """

    painting_id: str
    artist_id: str
    title: str
    year: int | None
    features: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "features", _frozen_f64(self.features))


@dataclass(frozen=True)
class ArtistRecord:
    """Artist identity, active period [period_start, period_end] and style."""

    artist_id: str
    name: str
    period_start: int
    period_end: int
    style: str


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable container of artists and paintings with an artist grouping.

    ``grouping`` maps each artist_id that owns at least one painting to the
    tuple of indices of its paintings in ``paintings``. Build instances via
    :meth:`Dataset.build`; the constructor does not validate (use
    :func:`validate_dataset` for that).
    """

    artists: tuple[ArtistRecord, ...]
    paintings: tuple[PaintingRecord, ...]
    grouping: dict[str, tuple[int, ...]]

    @classmethod
    def build(cls, artists, paintings) -> "Dataset":
        artists = tuple(artists)
        paintings = tuple(paintings)
        known = {a.artist_id for a in artists}
        grouping: dict[str, list[int]] = {}
        for i, p in enumerate(paintings):
            if p.artist_id in known:
                grouping.setdefault(p.artist_id, []).append(i)
        return cls(artists, paintings, {a: tuple(ix) for a, ix in grouping.items()})

    @property
    def n_paintings(self) -> int:
        return len(self.paintings)

    @property
    def n_artists(self) -> int:
        return len(self.artists)

    @property
    def feature_dim(self) -> int:
        if not self.paintings:
            return 0
        return int(self.paintings[0].features.shape[0])

    def artist_ids(self) -> tuple[str, ...]:
        return tuple(a.artist_id for a in self.artists)

    def artist(self, artist_id: str) -> ArtistRecord:
        for a in self.artists:
            if a.artist_id == artist_id:
                return a
        raise KeyError(artist_id)

    def paintings_of(self, artist_id: str) -> tuple[int, ...]:
        return self.grouping.get(artist_id, ())

    def features_matrix(self) -> np.ndarray:
        """All painting feature vectors stacked as an (N, D) float64 matrix."""
        if not self.paintings:
            return np.zeros((0, 0))
        return np.stack([p.features for p in self.paintings])


@dataclass(frozen=True)
class GroundTruthInfluences:
    """One-directional (influenced, influencer) artist pairs.

    (a, b) and (b, a) are distinct pairs; self-pairs are invalid.
    ``duplicates_collapsed`` counts input repetitions dropped at load time.
    """

    pairs: tuple[tuple[str, str], ...]
    duplicates_collapsed: int = 0


@dataclass(frozen=True)
class Violation:
    """A single invariant violation found by :func:`validate_dataset`."""

    record_id: str
    reason: str


def validate_dataset(dataset: Dataset, ground_truth: GroundTruthInfluences | None = None) -> list[Violation]:
    """Check every dataset invariant; returns violations (empty means valid).

    Side-effect free and idempotent: violations are data, not exceptions.
    """
    out: list[Violation] = []

    seen_artists: set[str] = set()
    for a in dataset.artists:
        if a.artist_id in seen_artists:
            out.append(Violation(a.artist_id, "duplicate artist_id"))
        seen_artists.add(a.artist_id)
        if a.period_start > a.period_end:
            out.append(Violation(a.artist_id, f"period_start {a.period_start} > period_end {a.period_end}"))

    dim = dataset.feature_dim
    seen_paintings: set[str] = set()
    for p in dataset.paintings:
        if p.painting_id in seen_paintings:
            out.append(Violation(p.painting_id, "duplicate painting_id"))
        seen_paintings.add(p.painting_id)
        if p.artist_id not in seen_artists:
            out.append(Violation(p.painting_id, f"unknown artist_id {p.artist_id!r}"))
        if p.features.shape[0] != dim:
            out.append(Violation(p.painting_id, f"feature length {p.features.shape[0]} != {dim}"))
        if not np.all(np.isfinite(p.features)):
            out.append(Violation(p.painting_id, "non-finite feature value"))

    # grouping must partition exactly the paintings of known artists
    covered: list[int] = []
    for artist_id, indices in dataset.grouping.items():
        if artist_id not in seen_artists:
            out.append(Violation(artist_id, "grouping key is not a known artist"))
        for i in indices:
            if not (0 <= i < dataset.n_paintings):
                out.append(Violation(artist_id, f"grouping index {i} out of range"))
            elif dataset.paintings[i].artist_id != artist_id:
                out.append(Violation(artist_id, f"grouping index {i} belongs to another artist"))
        covered.extend(indices)
    if len(covered) != len(set(covered)):
        out.append(Violation("<grouping>", "grouping lists are not disjoint"))
    expected = {i for i, p in enumerate(dataset.paintings) if p.artist_id in seen_artists}
    if set(covered) != expected:
        out.append(Violation("<grouping>", "grouping does not cover all paintings"))

    if ground_truth is not None:
        for influenced, influencer in ground_truth.pairs:
            if influenced == influencer:
                out.append(Violation(influenced, "self influence"))
            if influenced not in seen_artists:
                out.append(Violation(influenced, "ground-truth influenced id unknown"))
            if influencer not in seen_artists:
                out.append(Violation(influencer, "ground-truth influencer id unknown"))

    return out
