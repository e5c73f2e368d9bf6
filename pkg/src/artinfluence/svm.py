"""Max-margin kernel classifier trained by sequential minimal optimization.

Binary subproblems are solved by SMO with working-pair selection by maximal
KKT violation; multi-class decisions are one-vs-rest with argmax over the
per-class decision values. Features are min-max scaled per dimension with
parameters fit on training data only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .crossval import stratified_folds
from .errors import DegenerateLabels, DimensionMismatch

DEFAULT_TOL = 1e-3
DEFAULT_MAX_PASSES = 100_000
# conventional log2 grids of the classic RBF grid-search recipe
DEFAULT_C_GRID = tuple(float(2.0**e) for e in range(-5, 16, 2))
DEFAULT_GAMMA_GRID = tuple(float(2.0**e) for e in range(-15, 4, 2))

_STEP_EPS = 1e-12


def rbf_kernel_matrix(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    """exp(-gamma * ||x - z||^2) for all rows of a against all rows of b."""
    out = np.empty((a.shape[0], b.shape[0]))
    for i in range(a.shape[0]):
        diff = b - a[i]
        out[i] = np.exp(-gamma * np.einsum("ij,ij->i", diff, diff))
    return out


def scale_fit(train: np.ndarray):
    """Per-dimension min/max of the training data."""
    train = np.asarray(train, dtype=np.float64)
    return train.min(axis=0), train.max(axis=0)


def scale_apply(features: np.ndarray, mins: np.ndarray, maxs: np.ndarray) -> np.ndarray:
    """Min-max scale to [0,1] by training parameters; constant dims map to 0.

    Test values outside the training range extrapolate linearly.
    """
    features = np.asarray(features, dtype=np.float64)
    span = maxs - mins
    safe = np.where(span > 0, span, 1.0)
    scaled = (features - mins) / safe
    return np.where(span > 0, scaled, 0.0)


def scale_fit_apply(train: np.ndarray, test: np.ndarray):
    """Fit scaling on train, apply to both; returns (train', test', (min, max))."""
    mins, maxs = scale_fit(train)
    return scale_apply(train, mins, maxs), scale_apply(test, mins, maxs), (mins, maxs)


@dataclass(frozen=True, eq=False)
class BinaryKernelModel:
    """One-vs-rest binary model: support set, dual coefficients and bias."""

    support_idx: tuple[int, ...]
    support_vectors: np.ndarray
    support_y: np.ndarray
    support_alpha: np.ndarray
    bias: float
    max_kkt_violation: float = 0.0
    objective_history: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self):
        for name in ("support_vectors", "support_y", "support_alpha"):
            v = np.asarray(getattr(self, name), dtype=np.float64).copy()
            v.flags.writeable = False
            object.__setattr__(self, name, v)

    def decision(self, x: np.ndarray, gamma: float) -> float:
        if self.support_vectors.size == 0:
            return float(self.bias)
        k = rbf_kernel_matrix(x[None, :], self.support_vectors, gamma)[0]
        return float((self.support_alpha * self.support_y) @ k + self.bias)


@dataclass(frozen=True, eq=False)
class KernelClassifierModel:
    """One-vs-rest RBF classifier with optional stored feature scaling."""

    classes: tuple[str, ...]
    C: float
    gamma: float
    binaries: tuple[BinaryKernelModel, ...]
    dim: int
    scale_min: np.ndarray | None = None
    scale_max: np.ndarray | None = None

    def __post_init__(self):
        for name in ("scale_min", "scale_max"):
            v = getattr(self, name)
            if v is not None:
                v = np.asarray(v, dtype=np.float64).copy()
                v.flags.writeable = False
                object.__setattr__(self, name, v)


class _SmoState:
    """Mutable state of one binary SMO run over a precomputed kernel matrix."""

    def __init__(self, kernel: np.ndarray, y: np.ndarray, c: float):
        self.k = kernel
        self.y = y
        self.c = c
        self.n = y.shape[0]
        self.alpha = np.zeros(self.n)
        self.b = 0.0
        self.u = np.zeros(self.n)  # u_i = sum_j alpha_j y_j K_ij
        self.objective_history = [0.0]

    def errors(self) -> np.ndarray:
        return self.u + self.b - self.y

    def kkt_violations(self) -> np.ndarray:
        r = self.y * (self.u + self.b) - 1.0
        at_lower = self.alpha <= _STEP_EPS
        at_upper = self.alpha >= self.c - _STEP_EPS
        viol = np.abs(r)
        viol[at_lower] = np.maximum(0.0, -r[at_lower])
        viol[at_upper] = np.maximum(0.0, r[at_upper])
        return viol

    def objective(self) -> float:
        return float(self.alpha.sum() - 0.5 * (self.alpha * self.y) @ self.u)

    def try_update(self, i1: int, i2: int) -> bool:
        """Analytic two-variable step; returns True when accepted."""
        if i1 == i2:
            return False
        a1_old, a2_old = self.alpha[i1], self.alpha[i2]
        y1, y2 = self.y[i1], self.y[i2]
        e = self.errors()
        e1, e2 = e[i1], e[i2]
        s = y1 * y2
        if s < 0:
            low, high = max(0.0, a2_old - a1_old), min(self.c, self.c + a2_old - a1_old)
        else:
            low, high = max(0.0, a1_old + a2_old - self.c), min(self.c, a1_old + a2_old)
        if high - low < _STEP_EPS:
            return False
        k11, k12, k22 = self.k[i1, i1], self.k[i1, i2], self.k[i2, i2]
        eta = k11 + k22 - 2.0 * k12
        if eta > 0.0:
            a2 = a2_old + y2 * (e1 - e2) / eta
            a2 = min(max(a2, low), high)
        else:
            # objective is linear along the pair direction: test both ends
            d_obj = y2 * (e1 - e2)
            if d_obj > _STEP_EPS:
                a2 = high
            elif d_obj < -_STEP_EPS:
                a2 = low
            else:
                return False
        if abs(a2 - a2_old) < _STEP_EPS * (a2 + a2_old + _STEP_EPS):
            return False
        a1 = a1_old + s * (a2_old - a2)
        a1 = min(max(a1, 0.0), self.c)

        d1, d2 = y1 * (a1 - a1_old), y2 * (a2 - a2_old)
        b1 = self.b - e1 - d1 * k11 - d2 * k12
        b2 = self.b - e2 - d1 * k12 - d2 * k22
        if _STEP_EPS < a1 < self.c - _STEP_EPS:
            new_b = b1
        elif _STEP_EPS < a2 < self.c - _STEP_EPS:
            new_b = b2
        else:
            new_b = (b1 + b2) / 2.0
        self.u = self.u + d1 * self.k[:, i1] + d2 * self.k[:, i2]
        self.alpha[i1], self.alpha[i2] = a1, a2
        self.b = new_b

        obj = self.objective()
        prev = self.objective_history[-1]
        if obj < prev - 1e-9 * max(1.0, abs(prev)):
            raise AssertionError("SMO dual objective decreased")
        self.objective_history.append(obj)
        return True


def _solve_binary(kernel: np.ndarray, y: np.ndarray, c: float, tol: float, max_passes: int) -> _SmoState:
    state = _SmoState(kernel, y, c)
    n = state.n
    updates = 0
    while updates < max_passes:
        viol = state.kkt_violations()
        order_i = np.lexsort((np.arange(n), -viol))
        if viol[order_i[0]] <= tol:
            break
        progressed = False
        for i in order_i:
            if viol[i] <= tol:
                break
            gaps = np.abs(state.errors() - state.errors()[i])
            for j in np.lexsort((np.arange(n), -gaps)):
                if state.try_update(i, int(j)):
                    progressed = True
                    updates += 1
                    break
            if progressed:
                break
        if not progressed:
            break  # no pair can move: numerically converged
    return state


def train_kernel_classifier(
    features,
    labels,
    c: float,
    gamma: float,
    tol: float = DEFAULT_TOL,
    max_passes: int = DEFAULT_MAX_PASSES,
) -> KernelClassifierModel:
    """Train one-vs-rest binary SMO models, one per class label.

    Deterministic for a fixed sample order. Raises DegenerateLabels when
    fewer than two classes are present.
    """
    x = np.asarray(features, dtype=np.float64)
    labels = [str(lbl) for lbl in labels]
    classes = tuple(sorted(set(labels)))
    if len(classes) < 2:
        raise DegenerateLabels(f"need >= 2 classes, got {classes}")
    kernel = rbf_kernel_matrix(x, x, gamma)
    binaries = []
    for cls in classes:
        y = np.where(np.asarray(labels) == cls, 1.0, -1.0)
        state = _solve_binary(kernel, y, c, tol, max_passes)
        support = np.where(state.alpha > _STEP_EPS)[0]
        binaries.append(
            BinaryKernelModel(
                tuple(int(i) for i in support),
                x[support],
                y[support],
                state.alpha[support],
                float(state.b),
                float(state.kkt_violations().max(initial=0.0)),
                tuple(state.objective_history),
            )
        )
    return KernelClassifierModel(classes, float(c), float(gamma), tuple(binaries), int(x.shape[1]))


def decision_values(model: KernelClassifierModel, x) -> np.ndarray:
    """Per-class decision values in model class order (scaling applied)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.dim,):
        raise DimensionMismatch(f"expected a vector of width {model.dim}, got shape {x.shape}")
    if model.scale_min is not None:
        x = scale_apply(x[None, :], model.scale_min, model.scale_max)[0]
    return np.array([b.decision(x, model.gamma) for b in model.binaries])


def predict(model: KernelClassifierModel, x):
    """Predicted label plus the per-class decision values.

    Ties break toward the lowest class index.
    """
    values = decision_values(model, x)
    return model.classes[int(np.argmax(values))], values


@dataclass(frozen=True, eq=False)
class GridSearchResult:
    """Best (C, gamma) with the full mean-accuracy surface over the grid."""

    c: float
    gamma: float
    c_grid: tuple[float, ...]
    gamma_grid: tuple[float, ...]
    surface: np.ndarray  # len(c_grid) x len(gamma_grid) mean CV accuracy


def grid_search(
    features,
    labels,
    folds: int,
    c_grid=DEFAULT_C_GRID,
    gamma_grid=DEFAULT_GAMMA_GRID,
    tol: float = DEFAULT_TOL,
    max_passes: int = DEFAULT_MAX_PASSES,
    seed: int = 0,
) -> GridSearchResult:
    """Exhaustive (C, gamma) search by stratified k-fold CV accuracy.

    Ties break toward smaller C, then smaller gamma.
    """
    x = np.asarray(features, dtype=np.float64)
    labels = [str(lbl) for lbl in labels]
    fold_idx = stratified_folds(labels, folds, seed)
    surface = np.zeros((len(c_grid), len(gamma_grid)))
    for ci, c in enumerate(c_grid):
        for gi, gamma in enumerate(gamma_grid):
            correct = 0
            for f in range(folds):
                test = fold_idx[f]
                train = np.concatenate([fold_idx[g] for g in range(folds) if g != f])
                model = train_kernel_classifier(x[train], [labels[i] for i in train], c, gamma, tol, max_passes)
                for i in test:
                    if predict(model, x[i])[0] == labels[i]:
                        correct += 1
            surface[ci, gi] = correct / len(labels)
    best_ci, best_gi = min(
        ((ci, gi) for ci in range(len(c_grid)) for gi in range(len(gamma_grid))),
        key=lambda p: (-surface[p], c_grid[p[0]], gamma_grid[p[1]]),
    )
    return GridSearchResult(float(c_grid[best_ci]), float(gamma_grid[best_gi]), tuple(c_grid), tuple(gamma_grid), surface)


class FittedKernelClassifier:
    """A trained model plus the scaling fit on its training split."""

    def __init__(self, model: KernelClassifierModel):
        self.model = model

    def predict(self, features) -> list[str]:
        return [predict(self.model, row)[0] for row in np.asarray(features, dtype=np.float64)]


class KernelClassifierSpec:
    """Scaling + grid search + SMO training, packaged for cross_validate.

    Scaling parameters are fit on the training split only and stored in the
    model, so test features are scaled consistently at prediction time. When
    the training split cannot sustain the inner grid-search folds, the first
    grid point is used.
    """

    def __init__(
        self,
        c_grid=DEFAULT_C_GRID,
        gamma_grid=DEFAULT_GAMMA_GRID,
        grid_folds: int = 3,
        tol: float = DEFAULT_TOL,
        max_passes: int = DEFAULT_MAX_PASSES,
        seed: int = 0,
    ):
        self.c_grid = tuple(c_grid)
        self.gamma_grid = tuple(gamma_grid)
        self.grid_folds = grid_folds
        self.tol = tol
        self.max_passes = max_passes
        self.seed = seed

    def fit(self, features, labels) -> FittedKernelClassifier:
        x = np.asarray(features, dtype=np.float64)
        labels = [str(lbl) for lbl in labels]
        mins, maxs = scale_fit(x)
        x_scaled = scale_apply(x, mins, maxs)
        min_class = min(labels.count(c) for c in set(labels))
        inner_folds = min(self.grid_folds, min_class)
        if len(self.c_grid) == 1 and len(self.gamma_grid) == 1:
            best_c, best_gamma = self.c_grid[0], self.gamma_grid[0]
        elif inner_folds >= 2:
            result = grid_search(x_scaled, labels, inner_folds, self.c_grid, self.gamma_grid, self.tol, self.max_passes, self.seed)
            best_c, best_gamma = result.c, result.gamma
        else:
            best_c, best_gamma = self.c_grid[0], self.gamma_grid[0]
        model = train_kernel_classifier(x_scaled, labels, best_c, best_gamma, self.tol, self.max_passes)
        model = KernelClassifierModel(model.classes, model.C, model.gamma, model.binaries, model.dim, mins, maxs)
        return FittedKernelClassifier(model)
