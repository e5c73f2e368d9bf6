"""Command-line orchestration: validate, distances, classify, influence, map.

Every run writes its artifacts plus a manifest (config echo, input hashes,
output hashes) into the output directory. Outputs are byte-identical for
identical inputs, configuration and seed. Exit codes: 0 success, 1 data
error, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import os
import re
import sys
from dataclasses import dataclass, replace

import numpy as np

from . import io
from .bow import DEFAULT_CODEBOOK_SIZE, kmeans_codebook, quantize
from .crossval import cross_validate
from .distances import EUCLIDEAN, MANIFOLD, build_knn_graph, euclidean_all_pairs, geodesic_all_pairs
from .embedding import map_of_artists
from .errors import ArtInfluenceError, ConfigError, ReferentialError
from .influence import (
    Q_GRID_DEFAULT,
    TOP_K_DEFAULT,
    build_influence_graph,
    hausdorff_matrix,
    recall_at_k,
    recall_table,
    top_k_table,
)
from .lda import LdaClassifierSpec
from .model import PaintingRecord, validate_dataset
from .svm import DEFAULT_C_GRID, DEFAULT_GAMMA_GRID, KernelClassifierSpec
from .io import load_dataset, load_descriptors, load_ground_truth, persist

OUT_DIR_ENV = "ARTINFLUENCE_OUT"

METRICS = (EUCLIDEAN, MANIFOLD)
CLASSIFIERS = ("kernel", "lda")


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration of one CLI run."""

    subcommand: str
    features: str | None = None
    artists: str | None = None
    ground_truth: str | None = None
    descriptors: str | None = None
    out: str = "."
    metric: str = EUCLIDEAN
    k_nn: int = 10
    q: float = 50.0
    top_k: tuple[int, ...] = TOP_K_DEFAULT
    classifier: str = "kernel"
    folds: int = 5
    seed: int = 0
    dims: int = 3
    codebook_size: int = DEFAULT_CODEBOOK_SIZE
    topics: int = 20
    c_grid: tuple[float, ...] = DEFAULT_C_GRID
    gamma_grid: tuple[float, ...] = DEFAULT_GAMMA_GRID


def _validate_config(cfg: RunConfig) -> None:
    if cfg.metric not in METRICS:
        raise ConfigError(f"metric must be one of {METRICS}, got {cfg.metric!r}")
    if cfg.classifier not in CLASSIFIERS:
        raise ConfigError(f"classifier must be one of {CLASSIFIERS}, got {cfg.classifier!r}")
    if not (0.0 < cfg.q <= 100.0):
        raise ConfigError(f"q must be in (0, 100], got {cfg.q}")
    if cfg.folds < 2:
        raise ConfigError(f"folds must be >= 2, got {cfg.folds}")
    if cfg.k_nn < 1:
        raise ConfigError(f"k-nn must be >= 1, got {cfg.k_nn}")
    if cfg.dims < 1:
        raise ConfigError(f"dims must be >= 1, got {cfg.dims}")
    if cfg.codebook_size < 1 or cfg.topics < 1:
        raise ConfigError("codebook-size and topics must be >= 1")
    if not cfg.top_k or any(k < 1 for k in cfg.top_k):
        raise ConfigError(f"top-k entries must be >= 1, got {cfg.top_k}")
    if not cfg.c_grid or not cfg.gamma_grid:
        raise ConfigError("c-grid and gamma-grid must be non-empty")
    if cfg.features is None or cfg.artists is None:
        raise ConfigError("--features and --artists are required")


_INT_KEYS = {"k_nn", "folds", "seed", "dims", "codebook_size", "topics"}
_PATH_KEYS = {"features", "artists", "ground_truth", "descriptors", "out"}


def _coerce(key: str, raw: str):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key == "q":
            return float(raw)
        if key == "top_k":
            return tuple(int(t) for t in raw.split(","))
        if key in ("c_grid", "gamma_grid"):
            return tuple(float(t) for t in raw.split(","))
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    if key in _PATH_KEYS or key in ("metric", "classifier"):
        return raw
    raise ConfigError(f"unknown config key {key!r}")


def _load_config_file(path) -> dict:
    values = {}
    try:
        with open(path, encoding="utf-8") as f:
            lines = f.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    for line_no, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if ": " not in line:
            raise ConfigError(f"{path}:{line_no}: expected 'key: value'")
        key, raw = line.split(": ", 1)
        values[key] = _coerce(key, raw)
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="artinfluence", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p, with_gt=False, with_metric=False, with_q=False):
        p.add_argument("--config", help="keyed config file; flags override it")
        p.add_argument("--features", help="feature CSV (2-line header: family, dim)")
        p.add_argument("--artists", help="artist CSV")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="global seed (default 0)")
        if with_gt:
            p.add_argument("--ground-truth", dest="ground_truth", help="influence pairs CSV")
        if with_metric:
            p.add_argument("--metric", choices=METRICS, help="painting metric (default euclidean)")
            p.add_argument("--k-nn", dest="k_nn", type=int, help="neighbor count for the manifold graph (default 10)")
        if with_q:
            p.add_argument("--q", type=float, help="percentile for artist distance (default 50)")

    p = sub.add_parser("validate", help="check dataset and ground-truth invariants")
    add_common(p, with_gt=True)

    p = sub.add_parser("distances", help="painting distance matrices")
    add_common(p, with_metric=True)

    p = sub.add_parser("classify", help="style classification under cross-validation")
    add_common(p)
    p.add_argument("--classifier", choices=CLASSIFIERS, help="classifier family (default kernel)")
    p.add_argument("--descriptors", help="local-descriptor CSV; triggers the BoW pipeline")
    p.add_argument("--codebook-size", dest="codebook_size", type=int, help="visual words (default 600)")
    p.add_argument("--topics", type=int, help="topics per style for lda (default 20)")
    p.add_argument("--folds", type=int, help="cross-validation folds (default 5)")
    p.add_argument("--c-grid", dest="c_grid", help="comma-separated C grid")
    p.add_argument("--gamma-grid", dest="gamma_grid", help="comma-separated gamma grid")

    p = sub.add_parser("influence", help="influence graph, top-k suggestions, recall tables")
    add_common(p, with_gt=True, with_metric=True, with_q=True)
    p.add_argument("--top-k", dest="top_k", help="comma-separated k values (default 5,10,15,20,25)")

    p = sub.add_parser("map", help="map of artists (MDS embedding of the influence graph)")
    add_common(p, with_metric=True, with_q=True)
    p.add_argument("--dims", type=int, help="embedding dimensions (default 3)")
    return parser


def _merge_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(subcommand=args.subcommand)
    if getattr(args, "config", None):
        cfg = replace(cfg, **_load_config_file(args.config))
    overrides = {}
    for key in vars(args):
        if key in ("config", "subcommand"):
            continue
        value = getattr(args, key)
        if value is None:
            continue
        if key in ("top_k", "c_grid", "gamma_grid") and isinstance(value, str):
            value = _coerce(key, value)
        overrides[key] = value
    cfg = replace(cfg, **overrides)
    env_out = os.environ.get(OUT_DIR_ENV)
    if env_out:
        cfg = replace(cfg, out=env_out)
    _validate_config(cfg)
    return cfg


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


_CONFIG_ECHO_KEYS = (
    "features", "artists", "ground_truth", "descriptors", "metric", "k_nn", "q",
    "top_k", "classifier", "folds", "seed", "dims", "codebook_size", "topics",
    "c_grid", "gamma_grid",
)


def _write_manifest(cfg: RunConfig, inputs: dict, outputs: list) -> None:
    lines = ["artifact: manifest\n", f"version: {io.FORMAT_VERSION}\n", f"subcommand: {cfg.subcommand}\n"]
    for key in _CONFIG_ECHO_KEYS:
        value = getattr(cfg, key)
        if isinstance(value, tuple):
            value = ",".join(str(v) for v in value)
        lines.append(f"config: {key}={value}\n")
    for role in sorted(inputs):
        lines.append(f"input: {role} {_sha256(inputs[role])} {inputs[role]}\n")
    for name in sorted(outputs):
        lines.append(f"output: {name} {_sha256(os.path.join(cfg.out, name))}\n")
    with open(os.path.join(cfg.out, "manifest.txt"), "w", newline="", encoding="utf-8") as f:
        f.writelines(lines)


def _style_labels(dataset) -> list[str]:
    styles = {a.artist_id: a.style for a in dataset.artists}
    return [styles[p.artist_id] for p in dataset.paintings]


def _painting_matrix(cfg: RunConfig, dataset):
    """Distance matrix for the configured metric."""
    euclid = euclidean_all_pairs(dataset)
    if cfg.metric == EUCLIDEAN:
        return euclid, [("euclidean_distances.csv", euclid)]
    graph = build_knn_graph(dataset, cfg.k_nn, euclid)
    manifold = geodesic_all_pairs(graph)
    return manifold, [("euclidean_distances.csv", euclid), ("manifold_distances.csv", manifold)]


def _out_path(cfg: RunConfig, name: str) -> str:
    return os.path.join(cfg.out, name)


def _run_validate(cfg: RunConfig, inputs: dict) -> tuple[list, int]:
    dataset = load_dataset(cfg.features, cfg.artists)
    ground_truth = None
    if cfg.ground_truth:
        ground_truth = load_ground_truth(cfg.ground_truth, dataset)
    violations = validate_dataset(dataset, ground_truth)
    persist(violations, _out_path(cfg, "violations.csv"))
    for v in violations:
        print(f"violation: {v.record_id}: {v.reason}")
    print(f"validate: {dataset.n_artists} artists, {dataset.n_paintings} paintings, {len(violations)} violation(s)")
    return ["violations.csv"], (0 if not violations else 1)


def _run_distances(cfg: RunConfig, inputs: dict) -> tuple[list, int]:
    dataset = load_dataset(cfg.features, cfg.artists)
    _, matrices = _painting_matrix(cfg, dataset)
    outputs = []
    for name, matrix in matrices:
        persist(matrix, _out_path(cfg, name))
        outputs.append(name)
    print(f"distances: wrote {', '.join(outputs)}")
    return outputs, 0


def _sanitize(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", label)


def _bow_features(cfg: RunConfig, dataset):
    """Codebook + per-painting histograms from a descriptor file."""
    descriptors = load_descriptors(cfg.descriptors)
    pooled = np.vstack([descriptors[pid] for pid in sorted(descriptors)])
    codebook = kmeans_codebook(pooled, cfg.codebook_size, cfg.seed)
    normalized, counts = [], []
    for p in dataset.paintings:
        if p.painting_id not in descriptors:
            raise ReferentialError(f"no descriptors for painting {p.painting_id!r}")
        hist = quantize(descriptors[p.painting_id], codebook)
        if hist.is_empty:
            raise ReferentialError(f"painting {p.painting_id!r} has an empty histogram")
        normalized.append(hist.normalized)
        counts.append(hist.counts)
    return codebook, np.vstack(normalized), np.vstack(counts).astype(float)


def _run_classify(cfg: RunConfig, inputs: dict) -> tuple[list, int]:
    dataset = load_dataset(cfg.features, cfg.artists)
    labels = _style_labels(dataset)
    outputs = []
    if cfg.descriptors:
        codebook, features, counts = _bow_features(cfg, dataset)
        persist(codebook, _out_path(cfg, "codebook.txt"))
        outputs.append("codebook.txt")
        family = f"bow{cfg.codebook_size}"
        for name, mat in (("bow_histograms.csv", features), ("bow_counts.csv", counts)):
            records = [
                PaintingRecord(p.painting_id, p.artist_id, p.title, p.year, mat[i])
                for i, p in enumerate(dataset.paintings)
            ]
            suffix = "-counts" if name == "bow_counts.csv" else ""
            io.write_features(_out_path(cfg, name), family + suffix, mat.shape[1], records)
            outputs.append(name)
    else:
        features = dataset.features_matrix()

    if cfg.classifier == "kernel":
        spec = KernelClassifierSpec(cfg.c_grid, cfg.gamma_grid, seed=cfg.seed)
    else:
        spec = LdaClassifierSpec(n_topics=cfg.topics, seed=cfg.seed)

    confusion = cross_validate(spec, features, labels, cfg.folds, cfg.seed)
    persist(confusion, _out_path(cfg, "confusion_matrix.csv"))
    outputs.append("confusion_matrix.csv")

    with open(_out_path(cfg, "style_accuracy.csv"), "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["style", "accuracy(%)"])
        for label, acc in confusion.per_class_accuracy():
            w.writerow([label, io.fmt_float(acc)])
    outputs.append("style_accuracy.csv")

    fitted = spec.fit(features, labels)
    if cfg.classifier == "kernel":
        persist(fitted.model, _out_path(cfg, "kernel_model.txt"))
        outputs.append("kernel_model.txt")
    else:
        for style, model in fitted.models.items():
            name = f"topic_model_{_sanitize(style)}.txt"
            persist(model, _out_path(cfg, name))
            outputs.append(name)
    print(f"classify: overall accuracy {confusion.overall_accuracy:.2f}% over {cfg.folds} folds")
    return outputs, 0


def _run_influence(cfg: RunConfig, inputs: dict) -> tuple[list, int]:
    dataset = load_dataset(cfg.features, cfg.artists)
    matrix, _ = _painting_matrix(cfg, dataset)
    outputs = []
    graph = build_influence_graph(dataset, cfg.q, matrix)
    persist(graph, _out_path(cfg, "influence_graph.txt"))
    outputs.append("influence_graph.txt")
    suggestions = top_k_table(graph, max(cfg.top_k))
    persist(suggestions, _out_path(cfg, "top_influences.csv"))
    outputs.append("top_influences.csv")
    persist(hausdorff_matrix(dataset, matrix), _out_path(cfg, "hausdorff_diagnostic.csv"))
    outputs.append("hausdorff_diagnostic.csv")
    if cfg.ground_truth:
        ground_truth = load_ground_truth(cfg.ground_truth, dataset)
        table = recall_table(dataset, matrix, ground_truth, Q_GRID_DEFAULT, cfg.top_k)
        persist(table, _out_path(cfg, "recall_table.csv"))
        outputs.append("recall_table.csv")
        flagged = recall_at_k(graph, ground_truth, max(cfg.top_k)).infeasible
        with open(_out_path(cfg, "ground_truth_flags.csv"), "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["influenced", "influencer", "flag"])
            for influenced, influencer in flagged:
                w.writerow([influenced, influencer, "temporally-infeasible"])
        outputs.append("ground_truth_flags.csv")
    print(f"influence: graph over {dataset.n_artists} artists at q={cfg.q} ({cfg.metric})")
    return outputs, 0


def _run_map(cfg: RunConfig, inputs: dict) -> tuple[list, int]:
    dataset = load_dataset(cfg.features, cfg.artists)
    matrix, _ = _painting_matrix(cfg, dataset)
    graph = build_influence_graph(dataset, cfg.q, matrix)
    styles = {a.artist_id: a.style for a in dataset.artists}
    emb = map_of_artists(graph, cfg.dims, styles)
    outputs = ["embedding.txt", "coordinates.csv"]
    persist(emb, _out_path(cfg, "embedding.txt"))

    with open(_out_path(cfg, "coordinates.csv"), "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["artist_id", "style"] + [f"x{i + 1}" for i in range(cfg.dims)])
        for i, artist_id in enumerate(emb.artist_ids):
            w.writerow([artist_id, emb.styles[i]] + [io.fmt_float(v) for v in emb.coords[i]])
    pairs = [(0, 1)] if cfg.dims >= 2 else []
    if cfg.dims >= 3:
        pairs += [(0, 2), (1, 2)]
    for a, b in pairs:
        name = f"projection_{a + 1}_{b + 1}.csv"
        with open(_out_path(cfg, name), "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["artist_id", "style", f"x{a + 1}", f"x{b + 1}"])
            for i, artist_id in enumerate(emb.artist_ids):
                w.writerow([artist_id, emb.styles[i], io.fmt_float(emb.coords[i, a]), io.fmt_float(emb.coords[i, b])])
        outputs.append(name)
    print(f"map: embedded {len(emb.artist_ids)} artists into {cfg.dims} dimensions")
    return outputs, 0


_RUNNERS = {
    "validate": _run_validate,
    "distances": _run_distances,
    "classify": _run_classify,
    "influence": _run_influence,
    "map": _run_map,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _merge_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        os.makedirs(cfg.out, exist_ok=True)
        inputs = {}
        for role in ("features", "artists", "ground_truth", "descriptors"):
            path = getattr(cfg, role)
            if path:
                inputs[role] = path
        outputs, status = _RUNNERS[cfg.subcommand](cfg, inputs)
        _write_manifest(cfg, inputs, outputs)
        return status
    except (ArtInfluenceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
