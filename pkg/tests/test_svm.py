import numpy as np
import pytest

from artinfluence.errors import DegenerateLabels, DimensionMismatch
from artinfluence.svm import (
    BinaryKernelModel,
    KernelClassifierModel,
    decision_values,
    grid_search,
    predict,
    rbf_kernel_matrix,
    scale_apply,
    scale_fit_apply,
    train_kernel_classifier,
)


def qp_oracle(x, y, c, gamma):
    """Reference dual solution from a general-purpose QP solver."""
    from cvxopt import matrix, solvers

    n = len(y)
    k = rbf_kernel_matrix(x, x, gamma)
    q_mat = np.outer(y, y) * k
    solvers.options["show_progress"] = False
    solvers.options["abstol"] = 1e-12
    solvers.options["reltol"] = 1e-12
    solvers.options["feastol"] = 1e-12
    sol = solvers.qp(
        matrix(q_mat),
        matrix(-np.ones(n)),
        matrix(np.vstack([-np.eye(n), np.eye(n)])),
        matrix(np.concatenate([np.zeros(n), np.full(n, c)])),
        matrix(y[None, :]),
        matrix(np.zeros(1)),
    )
    alpha = np.array(sol["x"]).ravel()
    objective = alpha.sum() - 0.5 * alpha @ q_mat @ alpha
    return alpha, objective


def full_alpha(model, cls_idx, n):
    binary = model.binaries[cls_idx]
    alpha = np.zeros(n)
    for i, a in zip(binary.support_idx, binary.support_alpha):
        alpha[i] = a
    return alpha


def test_two_separable_points_100pct():
    x = np.array([[0.0, 0.0], [2.0, 2.0]])
    y = ["a", "b"]
    for c in (1.0, 10.0, 1000.0):
        model = train_kernel_classifier(x, y, c, 1.0)
        assert [predict(model, row)[0] for row in x] == y


def test_xor_trains_to_100pct():
    x = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
    y = ["pos", "pos", "neg", "neg"]
    model = train_kernel_classifier(x, y, 10.0, 1.0)
    assert [predict(model, row)[0] for row in x] == y
    for binary in model.binaries:
        assert binary.max_kkt_violation <= 1e-3


def test_dual_matches_qp_oracle(rng):
    for trial in range(8):
        n = int(rng.integers(3, 7))
        x = rng.normal(size=(n, 2)) * 2
        labels = ["a" if v < 0.5 else "b" for v in rng.random(n)]
        if len(set(labels)) < 2:
            labels[0] = "a" if labels[0] == "b" else "b"
        c, gamma = 10.0, 1.0
        model = train_kernel_classifier(x, labels, c, gamma, tol=1e-8, max_passes=500_000)
        for cls_idx, cls in enumerate(model.classes):
            y = np.where(np.asarray(labels) == cls, 1.0, -1.0)
            expected_alpha, expected_obj = qp_oracle(x, y, c, gamma)
            got_alpha = full_alpha(model, cls_idx, n)
            assert np.abs(got_alpha - expected_alpha).max() <= 1e-6
            assert abs(model.binaries[cls_idx].objective_history[-1] - expected_obj) <= 1e-6


def test_objective_non_decreasing_per_update(rng):
    x = rng.normal(size=(40, 3))
    labels = ["a" if v < 0.5 else "b" for v in rng.random(40)]
    model = train_kernel_classifier(x, labels, 10.0, 0.5)
    for binary in model.binaries:
        diffs = np.diff(binary.objective_history)
        assert diffs.size > 0
        assert diffs.min() >= -1e-12


def test_kkt_violations_below_tol_at_termination(rng):
    x = rng.normal(size=(30, 2))
    labels = ["a" if row[0] + row[1] > 0 else "b" for row in x]
    if len(set(labels)) < 2:
        labels[0] = "a" if labels[0] == "b" else "b"
    model = train_kernel_classifier(x, labels, 5.0, 1.0, tol=1e-3)
    for binary in model.binaries:
        assert binary.max_kkt_violation <= 1e-3
        assert np.all(binary.support_alpha >= 0.0)
        assert np.all(binary.support_alpha <= 5.0 + 1e-12)


def test_kernel_matrix_is_psd(rng):
    for _ in range(5):
        x = rng.normal(size=(20, 4))
        k = rbf_kernel_matrix(x, x, 0.7)
        assert np.array_equal(k, k.T) or np.abs(k - k.T).max() < 1e-15
        assert np.linalg.eigvalsh((k + k.T) / 2).min() >= -1e-8


def test_predict_matches_kernel_sum_oracle(rng):
    x = rng.normal(size=(20, 3))
    labels = ["a" if v < 0.4 else ("b" if v < 0.7 else "c") for v in rng.random(20)]
    model = train_kernel_classifier(x, labels, 2.0, 0.8)
    for _ in range(10):
        probe = rng.normal(size=3)
        values = decision_values(model, probe)
        # oracle: direct evaluation of sum_i alpha_i y_i K(x_i, probe) + b
        for cls_idx, binary in enumerate(model.binaries):
            expected = binary.bias
            for idx, a, yv in zip(binary.support_idx, binary.support_alpha, binary.support_y):
                expected += a * yv * np.exp(-0.8 * ((x[idx] - probe) ** 2).sum())
            assert abs(values[cls_idx] - expected) <= 1e-9
        label, _ = predict(model, probe)
        assert label == model.classes[int(np.argmax(values))]


def test_predict_tie_breaks_to_lowest_class_index():
    binary = BinaryKernelModel((), np.zeros((0, 2)), np.zeros(0), np.zeros(0), 0.5)
    model = KernelClassifierModel(("a", "b"), 1.0, 1.0, (binary, binary), 2)
    label, values = predict(model, np.zeros(2))
    assert list(values) == [0.5, 0.5]
    assert label == "a"


def test_predict_dimension_mismatch(rng):
    x = rng.normal(size=(6, 3))
    model = train_kernel_classifier(x, ["a", "a", "a", "b", "b", "b"], 1.0, 1.0)
    with pytest.raises(DimensionMismatch):
        predict(model, np.zeros(2))


def test_single_class_rejected(rng):
    with pytest.raises(DegenerateLabels):
        train_kernel_classifier(rng.normal(size=(4, 2)), ["a"] * 4, 1.0, 1.0)


def test_training_order_invariance(rng):
    x = np.vstack([rng.normal(size=(10, 2)), rng.normal(size=(10, 2)) + 6.0])
    labels = ["a"] * 10 + ["b"] * 10
    model = train_kernel_classifier(x, labels, 10.0, 0.5)
    perm = rng.permutation(20)
    shuffled = train_kernel_classifier(x[perm], [labels[i] for i in perm], 10.0, 0.5)
    probes = rng.normal(size=(15, 2)) * 3 + 3.0
    for probe in probes:
        assert predict(model, probe)[0] == predict(shuffled, probe)[0]


def test_scaling_basic_rules():
    train = np.array([[0.0, 5.0], [10.0, 5.0]])
    test = np.array([[20.0, 5.0]])
    train_s, test_s, (mins, maxs) = scale_fit_apply(train, test)
    assert list(train_s[:, 0]) == [0.0, 1.0]
    assert test_s[0, 0] == 2.0  # linear extrapolation beyond the training range
    assert np.all(train_s[:, 1] == 0.0) and test_s[0, 1] == 0.0  # constant dim
    assert np.array_equal(scale_apply(train, mins, maxs), train_s)


def test_grid_search_single_point(rng):
    x = np.vstack([rng.normal(size=(6, 2)), rng.normal(size=(6, 2)) + 5.0])
    labels = ["a"] * 6 + ["b"] * 6
    result = grid_search(x, labels, 2, c_grid=(4.0,), gamma_grid=(0.25,))
    assert (result.c, result.gamma) == (4.0, 0.25)
    assert result.surface.shape == (1, 1)


def test_grid_search_best_matches_exhaustive_reeval(rng):
    x = np.vstack([rng.normal(size=(8, 2)), rng.normal(size=(8, 2)) + 5.0])
    labels = ["a"] * 8 + ["b"] * 8
    c_grid, gamma_grid = (1.0, 100.0), (0.01, 1.0)
    result = grid_search(x, labels, 2, c_grid, gamma_grid, seed=3)
    best = result.surface[c_grid.index(result.c), gamma_grid.index(result.gamma)]
    assert best == result.surface.max()
    # oracle: rerun every grid point independently with its own fold loop
    from artinfluence.crossval import stratified_folds

    folds = stratified_folds(labels, 2, seed=3)
    for ci, c in enumerate(c_grid):
        for gi, gamma in enumerate(gamma_grid):
            correct = 0
            for f in range(2):
                train = np.concatenate([folds[g] for g in range(2) if g != f])
                model = train_kernel_classifier(x[train], [labels[i] for i in train], c, gamma)
                correct += sum(predict(model, x[i])[0] == labels[i] for i in folds[f])
            assert result.surface[ci, gi] == correct / len(labels)


def test_grid_search_tie_prefers_smaller_c_then_gamma(rng):
    # perfectly separable: every grid point reaches 100% accuracy
    x = np.vstack([rng.normal(scale=0.2, size=(6, 2)), rng.normal(scale=0.2, size=(6, 2)) + 50.0])
    labels = ["a"] * 6 + ["b"] * 6
    result = grid_search(x, labels, 2, (8.0, 1.0), (2.0, 0.5))
    assert result.surface.max() == result.surface.min() == 1.0
    assert (result.c, result.gamma) == (1.0, 0.5)
