"""File ingestion and artifact persistence.

Everything on disk is text. Tabular data (features, artists, ground truth,
matrices, reports) is CSV; models, graphs, codebooks and embeddings use a
keyed line format with an explicit version tag. Floats are written with
``repr`` so round-trips are bit-exact; +infinity is the token ``inf`` and
NaN is rejected everywhere.
"""

from __future__ import annotations

import csv
import logging
import math

import numpy as np

from .bow import Codebook
from .crossval import ConfusionMatrix
from .distances import PaintingDistanceMatrix
from .embedding import ArtistEmbedding
from .errors import (
    DimensionMismatch,
    ParseError,
    ReferentialError,
    TooManyDescriptors,
)
from .influence import InfluenceGraph, RecallTable, TopKTable
from .lda import TopicModel
from .model import ArtistRecord, Dataset, GroundTruthInfluences, PaintingRecord, Violation
from .svm import BinaryKernelModel, KernelClassifierModel

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
MAX_DESCRIPTORS_PER_PAINTING = 3000

_ARTIST_HEADER = ["artist_id", "name", "period_start", "period_end", "style"]
_GROUND_TRUTH_HEADER = ["influenced", "influencer"]


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        raise ValueError("NaN is not representable in any artifact file")
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _parse_float(token: str, path, line_no: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(path, line_no, f"not a number: {token!r}") from None
    if math.isnan(value):
        raise ParseError(path, line_no, "NaN is forbidden")
    return value


def _read_csv_rows(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.reader(f))


def _csv_writer(f):
    return csv.writer(f, lineterminator="\n")


# ---------------------------------------------------------------------------
# dataset loading


def load_artists(path) -> tuple[ArtistRecord, ...]:
    rows = _read_csv_rows(path)
    if not rows or rows[0] != _ARTIST_HEADER:
        raise ParseError(path, 1, f"expected header {','.join(_ARTIST_HEADER)}")
    artists = []
    seen = set()
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != 5:
            raise ParseError(path, line_no, f"expected 5 fields, got {len(row)}")
        artist_id, name, start_s, end_s, style = row
        if not artist_id:
            raise ParseError(path, line_no, "empty artist_id")
        if artist_id in seen:
            raise ParseError(path, line_no, f"duplicate artist_id {artist_id!r}")
        seen.add(artist_id)
        try:
            start, end = int(start_s), int(end_s)
        except ValueError:
            raise ParseError(path, line_no, "period bounds must be integer years") from None
        if start > end:
            raise ParseError(path, line_no, f"period_start {start} > period_end {end}")
        artists.append(ArtistRecord(artist_id, name, start, end, style))
    return tuple(artists)


def load_features(path, known_artists=None):
    """Parse a feature file: 2-line header (family, dim) then one row per painting."""
    rows = _read_csv_rows(path)
    if len(rows) < 2 or len(rows[0]) != 2 or rows[0][0] != "family":
        raise ParseError(path, 1, "expected header line 'family,<name>'")
    if len(rows[1]) != 2 or rows[1][0] != "dim":
        raise ParseError(path, 2, "expected header line 'dim,<D>'")
    family = rows[0][1]
    try:
        dim = int(rows[1][1])
    except ValueError:
        raise ParseError(path, 2, f"dimension is not an integer: {rows[1][1]!r}") from None
    if dim < 1:
        raise ParseError(path, 2, f"dimension must be >= 1, got {dim}")

    paintings = []
    seen = set()
    for line_no, row in enumerate(rows[2:], start=3):
        if len(row) != 4 + dim:
            raise DimensionMismatch(f"{path}:{line_no}: expected {4 + dim} fields ({dim} values), got {len(row)}")
        painting_id, artist_id, title, year_s = row[:4]
        if not painting_id:
            raise ParseError(path, line_no, "empty painting_id")
        if painting_id in seen:
            raise ParseError(path, line_no, f"duplicate painting_id {painting_id!r}")
        seen.add(painting_id)
        if known_artists is not None and artist_id not in known_artists:
            raise ReferentialError(f"{path}:{line_no}: unknown artist_id {artist_id!r}")
        if year_s == "":
            year = None
        else:
            try:
                year = int(year_s)
            except ValueError:
                raise ParseError(path, line_no, f"year is not an integer: {year_s!r}") from None
        values = [_parse_float(tok, path, line_no) for tok in row[4:]]
        if not all(math.isfinite(v) for v in values):
            raise ParseError(path, line_no, "non-finite feature value")
        paintings.append(PaintingRecord(painting_id, artist_id, title, year, values))
    return family, dim, tuple(paintings)


def load_dataset(features_path, artists_path) -> Dataset:
    """Load and cross-validate artists plus feature records into a Dataset."""
    artists = load_artists(artists_path)
    _, _, paintings = load_features(features_path, known_artists={a.artist_id for a in artists})
    return Dataset.build(artists, paintings)


def load_ground_truth(path, dataset: Dataset | None = None) -> GroundTruthInfluences:
    """Load (influenced, influencer) pairs; duplicates collapse with a warning."""
    rows = _read_csv_rows(path)
    if not rows or rows[0] != _GROUND_TRUTH_HEADER:
        raise ParseError(path, 1, f"expected header {','.join(_GROUND_TRUTH_HEADER)}")
    known = set(dataset.artist_ids()) if dataset is not None else None
    pairs: list[tuple[str, str]] = []
    seen = set()
    duplicates = 0
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise ParseError(path, line_no, f"expected 2 fields, got {len(row)}")
        influenced, influencer = row
        if not influenced or not influencer:
            raise ParseError(path, line_no, "empty artist id")
        if influenced == influencer:
            raise ReferentialError(f"{path}:{line_no}: self influence {influenced!r}")
        if known is not None:
            for artist_id in (influenced, influencer):
                if artist_id not in known:
                    raise ReferentialError(f"{path}:{line_no}: unknown artist_id {artist_id!r}")
        pair = (influenced, influencer)
        if pair in seen:
            duplicates += 1
            continue
        seen.add(pair)
        pairs.append(pair)
    if duplicates:
        log.warning("%s: collapsed %d duplicate ground-truth pair(s)", path, duplicates)
    return GroundTruthInfluences(tuple(pairs), duplicates)


def load_descriptors(path) -> dict[str, np.ndarray]:
    """Load per-painting local descriptors; at most 3000 rows per painting."""
    rows = _read_csv_rows(path)
    width = None
    collected: dict[str, list[list[float]]] = {}
    for line_no, row in enumerate(rows, start=1):
        if len(row) < 2:
            raise ParseError(path, line_no, "expected painting_id plus at least one value")
        painting_id = row[0]
        if not painting_id:
            raise ParseError(path, line_no, "empty painting_id")
        if width is None:
            width = len(row) - 1
        elif len(row) - 1 != width:
            raise ParseError(path, line_no, f"inconsistent descriptor width {len(row) - 1} != {width}")
        values = [_parse_float(tok, path, line_no) for tok in row[1:]]
        if not all(math.isfinite(v) for v in values):
            raise ParseError(path, line_no, "non-finite descriptor value")
        bucket = collected.setdefault(painting_id, [])
        if len(bucket) >= MAX_DESCRIPTORS_PER_PAINTING:
            raise TooManyDescriptors(f"painting {painting_id!r} exceeds {MAX_DESCRIPTORS_PER_PAINTING} descriptors")
        bucket.append(values)
    return {pid: np.asarray(vecs, dtype=np.float64) for pid, vecs in collected.items()}


def write_features(path, family: str, dim: int, paintings) -> None:
    """Write a feature file (the inverse of load_features)."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = _csv_writer(f)
        w.writerow(["family", family])
        w.writerow(["dim", str(dim)])
        for p in paintings:
            year = "" if p.year is None else str(p.year)
            w.writerow([p.painting_id, p.artist_id, p.title, year] + [fmt_float(v) for v in p.features])


# ---------------------------------------------------------------------------
# keyed line format


def _check_token(value: str) -> str:
    value = str(value)
    if "\t" in value or "\n" in value or "\r" in value:
        raise ValueError(f"identifier contains tab/newline: {value!r}")
    return value


def _write_keyed(path, kind: str, items) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write(f"artifact: {kind}\n")
        f.write(f"version: {FORMAT_VERSION}\n")
        for key, value in items:
            f.write(f"{key}: {value}\n")


def _read_keyed(path):
    with open(path, encoding="utf-8") as f:
        lines = f.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    parsed = []
    for line_no, line in enumerate(lines, start=1):
        if ": " not in line:
            raise ParseError(path, line_no, f"expected 'key: value', got {line!r}")
        key, value = line.split(": ", 1)
        parsed.append((key, value))
    if len(parsed) < 2 or parsed[0][0] != "artifact" or parsed[1][0] != "version":
        raise ParseError(path, 1, "missing artifact/version header")
    if parsed[1][1] != str(FORMAT_VERSION):
        raise ParseError(path, 2, f"unsupported format version {parsed[1][1]!r}")
    return parsed[0][1], parsed[2:]


def _vec(values) -> str:
    return " ".join(fmt_float(v) for v in values)


def _ivec(values) -> str:
    return " ".join(str(int(v)) for v in values)


def _svec(values) -> str:
    return "\t".join(_check_token(v) for v in values)


def _parse_vec(s: str) -> np.ndarray:
    if s == "":
        return np.zeros(0)
    return np.array([float(tok) for tok in s.split(" ")])


def _group(items) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    for key, value in items:
        out.setdefault(key, []).append(value)
    return out


def _one(groups: dict[str, list[str]], key: str, path) -> str:
    values = groups.get(key, [])
    if len(values) != 1:
        raise ParseError(path, 0, f"expected exactly one {key!r} entry, got {len(values)}")
    return values[0]


# ---------------------------------------------------------------------------
# artifact writers


def _write_distance_matrix(m: PaintingDistanceMatrix, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = _csv_writer(f)
        w.writerow([f"metric={m.metric}"] + list(m.ids))
        for i, row_id in enumerate(m.ids):
            w.writerow([row_id] + [fmt_float(v) for v in m.values[i]])


def _read_distance_matrix(path) -> PaintingDistanceMatrix:
    rows = _read_csv_rows(path)
    if not rows or not rows[0] or not rows[0][0].startswith("metric="):
        raise ParseError(path, 1, "expected corner cell 'metric=<tag>'")
    metric = rows[0][0].split("=", 1)[1]
    ids = rows[0][1:]
    n = len(ids)
    if len(rows) != n + 1:
        raise ParseError(path, len(rows), f"expected {n} data rows, got {len(rows) - 1}")
    values = np.zeros((n, n))
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != n + 1 or row[0] != ids[i - 2]:
            raise ParseError(path, i, "row header does not match column header")
        values[i - 2] = [_parse_float(tok, path, i) for tok in row[1:]]
    return PaintingDistanceMatrix(values, metric, ids)


def _write_codebook(cb: Codebook, path) -> None:
    items = [("seed", str(cb.seed)), ("k", str(cb.k)), ("width", str(cb.width))]
    items += [("centroid", _vec(row)) for row in cb.centroids]
    _write_keyed(path, "codebook", items)


def _read_codebook(groups, path) -> Codebook:
    k = int(_one(groups, "k", path))
    width = int(_one(groups, "width", path))
    rows = [_parse_vec(v) for v in groups.get("centroid", [])]
    if len(rows) != k or any(r.shape[0] != width for r in rows):
        raise ParseError(path, 0, "centroid rows disagree with k/width")
    return Codebook(np.vstack(rows), int(_one(groups, "seed", path)))


def _write_topic_model(tm: TopicModel, path) -> None:
    items = [
        ("n_topics", str(tm.n_topics)),
        ("vocab_size", str(tm.vocab_size)),
        ("alpha", fmt_float(tm.alpha)),
    ]
    items += [("beta_row", _vec(row)) for row in tm.beta]
    _write_keyed(path, "topic_model", items)


def _read_topic_model(groups, path) -> TopicModel:
    t = int(_one(groups, "n_topics", path))
    vocab = int(_one(groups, "vocab_size", path))
    rows = [_parse_vec(v) for v in groups.get("beta_row", [])]
    if len(rows) != t or any(r.shape[0] != vocab for r in rows):
        raise ParseError(path, 0, "beta rows disagree with n_topics/vocab_size")
    return TopicModel(np.vstack(rows), float(_one(groups, "alpha", path)))


def _write_kernel_model(model: KernelClassifierModel, path) -> None:
    items = [
        ("C", fmt_float(model.C)),
        ("gamma", fmt_float(model.gamma)),
        ("dim", str(model.dim)),
        ("classes", _svec(model.classes)),
        ("scale_min", "none" if model.scale_min is None else _vec(model.scale_min)),
        ("scale_max", "none" if model.scale_max is None else _vec(model.scale_max)),
    ]
    for cls, binary in zip(model.classes, model.binaries):
        items.append(("class", _check_token(cls)))
        items.append(("bias", fmt_float(binary.bias)))
        items.append(("max_kkt_violation", fmt_float(binary.max_kkt_violation)))
        items.append(("support_index", _ivec(binary.support_idx)))
        items.append(("support_y", _vec(binary.support_y)))
        items.append(("support_alpha", _vec(binary.support_alpha)))
        for vec in binary.support_vectors:
            items.append(("support_vector", _vec(vec)))
    _write_keyed(path, "kernel_classifier", items)


def _read_kernel_model(items, path) -> KernelClassifierModel:
    head: dict[str, str] = {}
    sections: list[tuple[str, dict[str, list[str]]]] = []
    for key, value in items:
        if key == "class":
            sections.append((value, {}))
        elif sections:
            sections[-1][1].setdefault(key, []).append(value)
        else:
            head[key] = value
    classes = tuple(head["classes"].split("\t")) if head.get("classes") else ()
    dim = int(head["dim"])
    binaries = []
    for cls, sec in sections:
        support_idx = tuple(int(t) for t in sec["support_index"][0].split()) if sec["support_index"][0] else ()
        vectors = [_parse_vec(v) for v in sec.get("support_vector", [])]
        sv = np.vstack(vectors) if vectors else np.zeros((0, dim))
        binaries.append(
            BinaryKernelModel(
                support_idx,
                sv,
                _parse_vec(sec["support_y"][0]),
                _parse_vec(sec["support_alpha"][0]),
                float(sec["bias"][0]),
                float(sec["max_kkt_violation"][0]),
            )
        )
    if tuple(cls for cls, _ in sections) != classes:
        raise ParseError(path, 0, "class sections disagree with the classes header")
    scale_min = None if head["scale_min"] == "none" else _parse_vec(head["scale_min"])
    scale_max = None if head["scale_max"] == "none" else _parse_vec(head["scale_max"])
    return KernelClassifierModel(classes, float(head["C"]), float(head["gamma"]), tuple(binaries), dim, scale_min, scale_max)


def _write_influence_graph(g: InfluenceGraph, path) -> None:
    items = [
        ("q", fmt_float(g.q)),
        ("metric", _check_token(g.metric)),
        ("artists", _svec(g.artist_ids)),
    ]
    items += [("row", _vec(row)) for row in g.weights]
    _write_keyed(path, "influence_graph", items)


def _read_influence_graph(groups, path) -> InfluenceGraph:
    ids = _one(groups, "artists", path).split("\t")
    rows = [_parse_vec(v) for v in groups.get("row", [])]
    if len(rows) != len(ids) or any(r.shape[0] != len(ids) for r in rows):
        raise ParseError(path, 0, "weight rows disagree with artist count")
    return InfluenceGraph(ids, np.vstack(rows), float(_one(groups, "q", path)), _one(groups, "metric", path))


def _write_embedding(e: ArtistEmbedding, path) -> None:
    items = [
        ("dims", str(e.coords.shape[1])),
        ("artists", _svec(e.artist_ids)),
        ("styles", _svec(e.styles)),
        ("eigenvalues", _vec(e.eigenvalues)),
    ]
    items += [("coord", _vec(row)) for row in e.coords]
    _write_keyed(path, "embedding", items)


def _read_embedding(groups, path) -> ArtistEmbedding:
    ids = _one(groups, "artists", path).split("\t")
    styles = _one(groups, "styles", path).split("\t")
    dims = int(_one(groups, "dims", path))
    rows = [_parse_vec(v) for v in groups.get("coord", [])]
    if len(rows) != len(ids) or any(r.shape[0] != dims for r in rows):
        raise ParseError(path, 0, "coordinate rows disagree with dims/artists")
    return ArtistEmbedding(ids, styles, np.vstack(rows), _parse_vec(_one(groups, "eigenvalues", path)))


def _write_confusion(cm: ConfusionMatrix, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = _csv_writer(f)
        w.writerow(["confusion(%)"] + list(cm.labels))
        for i, lbl in enumerate(cm.labels):
            w.writerow([lbl] + [fmt_float(v) for v in cm.percent[i]])
        w.writerow(["class_count"] + [str(int(c)) for c in cm.class_counts])
        w.writerow(["fold_accuracy"] + [fmt_float(a) for a in cm.fold_accuracies])
        w.writerow(["overall_accuracy", fmt_float(cm.overall_accuracy)])


def _read_confusion(path) -> ConfusionMatrix:
    rows = _read_csv_rows(path)
    labels = rows[0][1:]
    n = len(labels)
    percent = np.zeros((n, n))
    for i in range(n):
        row = rows[1 + i]
        if row[0] != labels[i]:
            raise ParseError(path, 2 + i, "row label does not match header")
        percent[i] = [_parse_float(t, path, 2 + i) for t in row[1:]]
    tail = {row[0]: row[1:] for row in rows[1 + n :]}
    counts = [int(t) for t in tail["class_count"]]
    folds = [float(t) for t in tail["fold_accuracy"]]
    return ConfusionMatrix(labels, percent, counts, folds, float(tail["overall_accuracy"][0]))


def _format_q(q: float) -> str:
    return str(int(q)) if float(q).is_integer() else repr(float(q))


def _write_recall_table(rt: RecallTable, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = _csv_writer(f)
        w.writerow(["top-k recall"] + [str(k) for k in rt.ks])
        for i, q in enumerate(rt.qs):
            w.writerow([_format_q(q)] + [fmt_float(v) for v in rt.values[i]])


def _read_recall_table(path) -> RecallTable:
    rows = _read_csv_rows(path)
    ks = [int(t) for t in rows[0][1:]]
    qs = [float(row[0]) for row in rows[1:]]
    values = np.array([[_parse_float(t, path, i + 2) for t in row[1:]] for i, row in enumerate(rows[1:])])
    return RecallTable(qs, ks, values)


def _write_topk_table(t: TopKTable, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = _csv_writer(f)
        w.writerow(["artist_id", "rank", "influencer_id", "weight", "k"])
        for artist_id, rank, influencer, weight in t.rows:
            w.writerow([artist_id, str(rank), influencer, fmt_float(weight), str(t.k)])


def _read_topk_table(path) -> TopKTable:
    rows = _read_csv_rows(path)
    data = [(r[0], int(r[1]), r[2], _parse_float(r[3], path, i + 2)) for i, r in enumerate(rows[1:])]
    k = int(rows[1][4]) if len(rows) > 1 else 0
    return TopKTable(k, tuple(data))


def _write_violations(violations, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = _csv_writer(f)
        w.writerow(["record_id", "reason"])
        for v in violations:
            w.writerow([v.record_id, v.reason])


def _read_violations(path):
    rows = _read_csv_rows(path)
    return [Violation(r[0], r[1]) for r in rows[1:]]


# ---------------------------------------------------------------------------
# persist / load dispatch


def persist(obj, path) -> None:
    """Write any computed artifact to a self-describing text file."""
    if isinstance(obj, PaintingDistanceMatrix):
        _write_distance_matrix(obj, path)
    elif isinstance(obj, Codebook):
        _write_codebook(obj, path)
    elif isinstance(obj, TopicModel):
        _write_topic_model(obj, path)
    elif isinstance(obj, KernelClassifierModel):
        _write_kernel_model(obj, path)
    elif isinstance(obj, InfluenceGraph):
        _write_influence_graph(obj, path)
    elif isinstance(obj, ArtistEmbedding):
        _write_embedding(obj, path)
    elif isinstance(obj, ConfusionMatrix):
        _write_confusion(obj, path)
    elif isinstance(obj, RecallTable):
        _write_recall_table(obj, path)
    elif isinstance(obj, TopKTable):
        _write_topk_table(obj, path)
    elif isinstance(obj, (list, tuple)) and all(isinstance(v, Violation) for v in obj):
        _write_violations(obj, path)
    else:
        raise TypeError(f"don't know how to persist {type(obj).__name__}")


_KEYED_READERS = {
    "codebook": _read_codebook,
    "topic_model": _read_topic_model,
    "influence_graph": _read_influence_graph,
    "embedding": _read_embedding,
}

_CSV_READERS = {
    "confusion(%)": _read_confusion,
    "top-k recall": _read_recall_table,
    "artist_id": _read_topk_table,
    "record_id": _read_violations,
}


def load_artifact(path):
    """Load any file written by :func:`persist` back into its object."""
    with open(path, encoding="utf-8") as f:
        first = f.readline().rstrip("\n")
    if first.startswith("artifact: "):
        kind, items = _read_keyed(path)
        if kind == "kernel_classifier":
            return _read_kernel_model(items, path)
        reader = _KEYED_READERS.get(kind)
        if reader is None:
            raise ParseError(path, 1, f"unknown artifact kind {kind!r}")
        return reader(_group(items), path)
    corner = next(csv.reader([first]))[0] if first else ""
    if corner.startswith("metric="):
        return _read_distance_matrix(path)
    reader = _CSV_READERS.get(corner)
    if reader is None:
        raise ParseError(path, 1, f"unrecognized artifact header {corner!r}")
    return reader(path)
