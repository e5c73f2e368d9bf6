"""Stratified k-fold cross-validation with confusion-matrix reporting.

The harness is classifier-agnostic: a classifier spec exposes
``fit(features, labels) -> fitted`` and the fitted object exposes
``predict(features) -> list of labels``. Folds are stratified per class and
deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientSamples


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Row-normalized confusion percentages: rows true class, columns predicted.

    ``class_counts`` holds the number of test samples per true class across
    all folds; the overall accuracy is the diagonal weighted by these counts.
    """

    labels: tuple[str, ...]
    percent: np.ndarray
    class_counts: np.ndarray
    fold_accuracies: tuple[float, ...]
    overall_accuracy: float

    def __post_init__(self):
        p = np.asarray(self.percent, dtype=np.float64).copy()
        p.flags.writeable = False
        object.__setattr__(self, "percent", p)
        c = np.asarray(self.class_counts, dtype=np.int64).copy()
        c.flags.writeable = False
        object.__setattr__(self, "class_counts", c)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "fold_accuracies", tuple(float(a) for a in self.fold_accuracies))

    def per_class_accuracy(self) -> list[tuple[str, float]]:
        """Diagonal of the confusion matrix, one (label, percent) per class."""
        return [(lbl, float(self.percent[i, i])) for i, lbl in enumerate(self.labels)]


def stratified_folds(labels, folds: int, seed: int) -> list[np.ndarray]:
    """Disjoint covering fold index arrays, stratified per class.

    Each class's indices are shuffled with the seed and dealt round-robin,
    so per-class fold sizes differ by at most one.
    """
    labels = [str(lbl) for lbl in labels]
    if folds < 2:
        raise InsufficientSamples(f"folds must be >= 2, got {folds}")
    classes = sorted(set(labels))
    rng = np.random.default_rng(seed)
    per_fold: list[list[int]] = [[] for _ in range(folds)]
    for cls in classes:
        idx = np.array([i for i, lbl in enumerate(labels) if lbl == cls])
        if idx.size < folds:
            raise InsufficientSamples(f"class {cls!r} has {idx.size} samples < {folds} folds")
        idx = idx[rng.permutation(idx.size)]
        for f in range(folds):
            per_fold[f].extend(int(i) for i in idx[f::folds])
    return [np.array(sorted(f), dtype=int) for f in per_fold]


def cross_validate(spec, features, labels, folds: int = 5, seed: int = 0) -> ConfusionMatrix:
    """Run stratified k-fold CV of a classifier spec and aggregate confusion.

    Training (including any scaling or hyperparameter search the spec does
    internally) sees only the training split of each fold.
    """
    x = np.asarray(features, dtype=np.float64)
    labels = [str(lbl) for lbl in labels]
    classes = sorted(set(labels))
    class_index = {c: i for i, c in enumerate(classes)}
    fold_idx = stratified_folds(labels, folds, seed)

    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    fold_acc = []
    for f in range(folds):
        test = fold_idx[f]
        train = np.concatenate([fold_idx[g] for g in range(folds) if g != f])
        fitted = spec.fit(x[train], [labels[i] for i in train])
        predictions = fitted.predict(x[test])
        correct = 0
        for i, pred in zip(test, predictions):
            pred = str(pred)
            if pred not in class_index:
                raise ValueError(f"classifier predicted unknown label {pred!r}")
            counts[class_index[labels[i]], class_index[pred]] += 1
            correct += pred == labels[i]
        fold_acc.append(100.0 * correct / len(test))

    row_sums = counts.sum(axis=1)
    percent = np.zeros_like(counts, dtype=np.float64)
    nonzero = row_sums > 0
    percent[nonzero] = 100.0 * counts[nonzero] / row_sums[nonzero, None]
    overall = 100.0 * np.trace(counts) / counts.sum()
    return ConfusionMatrix(tuple(classes), percent, row_sums, tuple(fold_acc), float(overall))
