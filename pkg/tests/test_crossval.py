import numpy as np
import pytest

from artinfluence.crossval import cross_validate, stratified_folds
from artinfluence.errors import InsufficientSamples
from artinfluence.lda import LdaClassifierSpec
from artinfluence.svm import KernelClassifierSpec


class PerfectStub:
    """Looks the true label up from the full dataset; always right."""

    def __init__(self, features, labels):
        self.table = {np.asarray(x).tobytes(): y for x, y in zip(features, labels)}

    def fit(self, features, labels):
        return self

    def predict(self, features):
        return [self.table[np.asarray(x).tobytes()] for x in features]


class MajorityStub:
    """Predicts the overall majority class of its training split."""

    def fit(self, features, labels):
        counts = {}
        for lbl in labels:
            counts[lbl] = counts.get(lbl, 0) + 1
        self.label = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
        return self

    def predict(self, features):
        return [self.label] * len(features)


def balanced_data(rng, per_class=10, classes=("a", "b")):
    features = rng.normal(size=(per_class * len(classes), 3))
    labels = [c for c in classes for _ in range(per_class)]
    return features, labels


def test_perfect_stub_gives_identity_confusion(rng):
    x, y = balanced_data(rng)
    cm = cross_validate(PerfectStub(x, y), x, y, folds=5, seed=0)
    assert cm.overall_accuracy == 100.0
    assert np.array_equal(cm.percent, 100.0 * np.eye(2))
    assert all(a == 100.0 for a in cm.fold_accuracies)


def test_majority_stub_on_balanced_classes(rng):
    x, y = balanced_data(rng)
    cm = cross_validate(MajorityStub(), x, y, folds=5, seed=0)
    assert cm.overall_accuracy == 50.0


def test_rows_sum_to_100(rng):
    x, y = balanced_data(rng, per_class=9, classes=("a", "b", "c"))

    class Arbitrary:
        def fit(self, features, labels):
            return self

        def predict(self, features):
            return ["a" if f[0] > 0 else "b" for f in features]

    cm = cross_validate(Arbitrary(), x, y, folds=3, seed=1)
    assert np.abs(cm.percent.sum(axis=1) - 100.0).max() <= 1e-6


def test_folds_disjoint_and_covering(rng):
    labels = ["a"] * 14 + ["b"] * 21 + ["c"] * 7
    folds = stratified_folds(labels, 7, seed=3)
    flat = np.concatenate(folds)
    assert len(flat) == len(labels)
    assert len(set(flat.tolist())) == len(labels)
    for f in folds:
        got = {labels[i] for i in f}
        assert got == {"a", "b", "c"}


def test_fold_sizes_follow_twenty_percent_rule(rng):
    # 7 classes x 70 samples, 5 folds: 98 test samples per fold, 14 per class
    labels = [f"s{c}" for c in range(7) for _ in range(70)]
    folds = stratified_folds(labels, 5, seed=0)
    for f in folds:
        assert len(f) == 98
        per_class = {}
        for i in f:
            per_class[labels[i]] = per_class.get(labels[i], 0) + 1
        assert set(per_class.values()) == {14}


def test_fold_assignment_deterministic_and_seed_sensitive():
    labels = ["a"] * 12 + ["b"] * 12
    a1 = stratified_folds(labels, 4, seed=5)
    a2 = stratified_folds(labels, 4, seed=5)
    b = stratified_folds(labels, 4, seed=6)
    assert all(np.array_equal(x, y) for x, y in zip(a1, a2))
    assert any(not np.array_equal(x, y) for x, y in zip(a1, b))


def test_insufficient_samples_rejected():
    with pytest.raises(InsufficientSamples):
        stratified_folds(["a", "a", "b"], 2, seed=0)
    with pytest.raises(InsufficientSamples):
        stratified_folds(["a", "a", "b", "b"], 1, seed=0)


def test_kernel_spec_end_to_end(rng):
    x = np.vstack([rng.normal(scale=0.4, size=(10, 2)), rng.normal(scale=0.4, size=(10, 2)) + 8.0])
    y = ["a"] * 10 + ["b"] * 10
    spec = KernelClassifierSpec(c_grid=(1.0, 10.0), gamma_grid=(0.5,), grid_folds=2)
    cm = cross_validate(spec, x, y, folds=5, seed=0)
    assert cm.overall_accuracy == 100.0


def test_lda_spec_end_to_end(rng):
    left = np.zeros((10, 6))
    left[:, :3] = rng.integers(1, 15, size=(10, 3))
    right = np.zeros((10, 6))
    right[:, 3:] = rng.integers(1, 15, size=(10, 3))
    x = np.vstack([left, right])
    y = ["l"] * 10 + ["r"] * 10
    spec = LdaClassifierSpec(n_topics=2, seed=0)
    cm = cross_validate(spec, x, y, folds=5, seed=0)
    assert cm.overall_accuracy == 100.0


def test_overall_accuracy_is_count_weighted_diagonal(rng):
    x, y = balanced_data(rng, per_class=8, classes=("a", "b"))

    class HalfRight:
        def fit(self, features, labels):
            return self

        def predict(self, features):
            return ["a"] * len(features)

    cm = cross_validate(HalfRight(), x, y, folds=4, seed=2)
    weighted = (np.diag(cm.percent) * cm.class_counts).sum() / cm.class_counts.sum()
    assert abs(weighted - cm.overall_accuracy) <= 1e-9
