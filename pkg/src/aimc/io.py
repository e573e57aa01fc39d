"""
Dataset files, synthetic planted-model data, and result serialization.

File conventions
----------------
Matrix files store one sample per row. In memory a view is ``d_v x n``
(columns are samples); the transpose happens on load and on write.

``csv``
    Comma-separated decimal reals, no header, one sample per line.
``mvm1``
    4-byte magic ``MVM1``, u32 LE sample count, u32 LE feature count, then
    ``rows * cols`` float64 LE values in row-major order.

Labels are newline-delimited integers. A manifest is a JSON object::

    {"name": "...", "n": 2000, "k": 10, "labels_path": "labels.txt",
     "views": [{"name": "fac", "path": "fac.csv", "dim": 216, "format": "csv"}]}

with paths resolved relative to the manifest file.
"""

import csv
import json
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .linalg import orthonormal_columns
from .model import ModelState, MultiviewDataset, validate_dataset

logger = logging.getLogger(__name__)

MAGIC = b"MVM1"
_HEADER = struct.Struct("<4sII")
FORMATS = ("csv", "mvm1")


class DatasetError(ValueError):
    """One or more problems loading a dataset; ``problems`` lists them all."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


# ---------------------------------------------------------------------------
# matrices


def _format_for(path, fmt):
    if fmt:
        fmt = fmt.lower()
    else:
        fmt = "mvm1" if Path(path).suffix.lower() in (".mvm", ".mvm1", ".bin") else "csv"
    if fmt not in FORMATS:
        raise ValueError(f"unknown matrix format {fmt!r}; expected one of {FORMATS}")
    return fmt


def _read_csv(path):
    text = Path(path).read_text()
    if not text.strip():
        raise DatasetError([f"{path}: empty matrix file"])
    rows = []
    ncols = None
    for r, line in enumerate(text.splitlines()):
        if not line.strip():
            continue
        cells = line.split(",")
        if ncols is None:
            ncols = len(cells)
        elif len(cells) != ncols:
            raise DatasetError([f"{path}: row {r} has {len(cells)} cells, expected {ncols}"])
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            for c, cell in enumerate(cells):
                try:
                    float(cell)
                except ValueError:
                    raise DatasetError([f"{path}: unparseable cell {cell.strip()!r} at row {r}, col {c}"]) from None
    return np.array(rows, dtype=np.float64)


def _read_mvm1(path):
    raw = Path(path).read_bytes()
    if len(raw) == 0:
        raise DatasetError([f"{path}: empty matrix file"])
    if len(raw) < _HEADER.size:
        raise DatasetError([f"{path}: truncated header ({len(raw)} bytes)"])
    magic, rows, cols = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise DatasetError([f"{path}: bad magic {magic!r}, expected {MAGIC!r}"])
    need = _HEADER.size + 8 * rows * cols
    if len(raw) < need:
        raise DatasetError([f"{path}: truncated payload ({len(raw)} bytes, expected {need})"])
    if len(raw) > need:
        raise DatasetError([f"{path}: {len(raw) - need} trailing bytes after payload"])
    return np.frombuffer(raw, dtype="<f8", count=rows * cols, offset=_HEADER.size).reshape(rows, cols).astype(np.float64)


def load_matrix(path, fmt=None):
    """Read a samples-as-rows file and return it as a ``(features, samples)`` array."""
    fmt = _format_for(path, fmt)
    table = _read_csv(path) if fmt == "csv" else _read_mvm1(path)
    return np.asfortranarray(table.T)


def write_matrix(path, X, fmt=None):
    """Write a ``(features, samples)`` array as a samples-as-rows file."""
    fmt = _format_for(path, fmt)
    table = np.ascontiguousarray(np.asarray(X, dtype=np.float64).T)
    if fmt == "csv":
        with open(path, "w") as fh:
            for row in table:
                fh.write(",".join(repr(float(x)) for x in row) + "\n")
    else:
        rows, cols = table.shape
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, rows, cols))
            fh.write(table.astype("<f8").tobytes())


def load_labels(path):
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    try:
        return np.array([int(x) for x in lines], dtype=np.int64)
    except ValueError as exc:
        raise DatasetError([f"{path}: labels must be integers ({exc})"]) from None


def write_labels(path, labels):
    Path(path).write_text("".join(f"{int(x)}\n" for x in labels))


# ---------------------------------------------------------------------------
# manifests


def load_dataset(manifest_path):
    """
    Load every view listed in a JSON manifest.

    All problems found (bad fields, missing files, dim or sample-count
    mismatches, non-finite entries) are collected and raised together as
    one :class:`DatasetError`.
    """
    manifest_path = Path(manifest_path)
    try:
        doc = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise DatasetError([f"{manifest_path}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"]) from None
    problems = []
    if not isinstance(doc, dict):
        raise DatasetError([f"{manifest_path}: manifest must be a JSON object"])
    base = manifest_path.parent
    entries = doc.get("views")
    if not isinstance(entries, list) or not entries:
        raise DatasetError([f"{manifest_path}: field 'views' must be a non-empty list"])
    n_decl = doc.get("n")
    views, names = [], []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict) or "path" not in entry:
            problems.append(f"views[{i}]: missing field 'path'")
            continue
        name = entry.get("name", f"view{i}")
        path = base / entry["path"]
        try:
            X = load_matrix(path, entry.get("format"))
        except (OSError, DatasetError, ValueError) as exc:
            problems.append(f"view {i} ({name}): {exc}")
            continue
        dim = entry.get("dim")
        if dim is not None and X.shape[0] != dim:
            problems.append(f"view {i} ({name}): declared dim {dim}, file has {X.shape[0]} features")
        if n_decl is not None and X.shape[1] != n_decl:
            problems.append(f"view {i} ({name}): declared n={n_decl}, file has {X.shape[1]} samples")
        views.append(X)
        names.append(name)
    labels = None
    if doc.get("labels_path"):
        try:
            labels = load_labels(base / doc["labels_path"])
        except (OSError, DatasetError) as exc:
            problems.append(f"labels: {exc}")
    if problems:
        raise DatasetError(problems)
    ds = MultiviewDataset(views, names, labels, doc.get("k"), doc.get("name", manifest_path.stem))
    report = validate_dataset(ds)
    if not report.valid:
        raise DatasetError(report.errors)
    for w in report.warnings:
        logger.warning("%s: %s", ds.name, w)
    return ds


def save_dataset(ds, directory, fmt="csv"):
    """Write views, labels and a manifest into ``directory``; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    ext = "csv" if fmt == "csv" else "mvm"
    entries = []
    for name, X in zip(ds.view_names, ds.views):
        fname = f"{name}.{ext}"
        write_matrix(directory / fname, X, fmt)
        entries.append({"name": name, "path": fname, "dim": int(X.shape[0]), "format": fmt})
    manifest = {"name": ds.name, "n": int(ds.n), "views": entries}
    if ds.declared_k is not None:
        manifest["k"] = int(ds.declared_k)
    if ds.labels is not None:
        write_labels(directory / "labels.txt", ds.labels)
        manifest["labels_path"] = "labels.txt"
    path = directory / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path


# ---------------------------------------------------------------------------
# planted model


@dataclass
class SyntheticSpec:
    n: int
    m: int
    k: int
    d: int
    view_dims: list
    noise_sigma: float = 0.01
    cluster_weights: Optional[list] = None
    bad_view_sigma: Optional[list] = None
    seed: int = 0

    def check(self):
        if self.d < self.k:
            raise ValueError(f"d={self.d} < k={self.k}")
        if len(self.view_dims) != self.m:
            raise ValueError(f"{len(self.view_dims)} view dims given for m={self.m} views")
        if min(self.view_dims) < 1:
            raise ValueError("view dims must be >= 1")
        if self.n < self.k:
            raise ValueError(f"n={self.n} < k={self.k}")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        if self.bad_view_sigma is not None and len(self.bad_view_sigma) != self.m:
            raise ValueError("bad_view_sigma needs one entry per view")
        if self.cluster_weights is not None:
            w = np.asarray(self.cluster_weights, dtype=float)
            if w.shape != (self.k,) or np.any(w < 0) or not np.isclose(w.sum(), 1.0):
                raise ValueError("cluster_weights must be a probability vector of length k")


def _planted_generator(rng, p, d):
    if p >= d:
        Q, _ = orthonormal_columns(rng.standard_normal((p, d)))
        return Q
    Q, _ = orthonormal_columns(rng.standard_normal((d, p)))
    return Q.T.copy()


def gen_synthetic(spec):
    """
    Draw ``X_v = G_v F Y + noise`` from a planted model.

    ``G_v`` has orthonormal columns (orthonormal rows when ``d_v < d``),
    ``F`` has orthonormal columns, labels follow ``cluster_weights``
    (uniform by default) and noise is i.i.d. ``N(0, sigma_v^2)`` with
    ``sigma_v`` from ``bad_view_sigma`` when given, else ``noise_sigma``.

    Returns ``(dataset, planted_state)``; deterministic given ``spec.seed``.
    """
    spec.check()
    rng = np.random.default_rng(spec.seed)
    F, _ = orthonormal_columns(rng.standard_normal((spec.d, spec.k)))
    if spec.cluster_weights is None:
        labels = rng.integers(0, spec.k, size=spec.n)
    else:
        labels = rng.choice(spec.k, size=spec.n, p=np.asarray(spec.cluster_weights, dtype=float))
    labels = labels.astype(np.int64)
    gens, views = [], []
    for v, p in enumerate(spec.view_dims):
        G = _planted_generator(rng, p, spec.d)
        sigma = spec.noise_sigma if spec.bad_view_sigma is None else spec.bad_view_sigma[v]
        X = (G @ F)[:, labels]
        if sigma > 0:
            X = X + sigma * rng.standard_normal(X.shape)
        gens.append(G)
        views.append(X)
    ds = MultiviewDataset(views, [f"view{v}" for v in range(spec.m)], labels, spec.k, "synthetic")
    state = ModelState(gens, F, labels.copy(), np.full(spec.m, 1.0 / spec.m), spec.d, spec.k)
    return ds, state


# ---------------------------------------------------------------------------
# results


def trace_path_for(path):
    path = Path(path)
    return path.with_name(path.stem + ".trace.csv")


def result_document(result, metrics=None, config=None, extra=None):
    """JSON-ready dict; wall-clock fields live only under ``"timings"``."""
    doc = {
        "method": result.method,
        "config": config or {},
        "converged": bool(result.converged),
        "iters_run": int(result.iters_run),
        "objective_trace": [
            {"iter": int(i), "unsquared": float(u), "weighted_squared": float(w)}
            for i, u, w in result.objective_trace
        ],
        "weights": [float(a) for a in result.weights],
        "per_view_residuals": [float(r) for r in result.per_view_residuals],
        "flags": _jsonable(result.flags),
        "assignment": [int(x) for x in result.labels],
        "metrics": metrics.as_dict() if metrics is not None else None,
    }
    if extra:
        doc.update(_jsonable(extra))
    doc["timings"] = {
        "phases": {k: float(v) for k, v in result.timings.items()},
        "iteration_seconds": [float(t) for t in result.iteration_times],
    }
    return doc


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def write_result(result, metrics, path, config=None, extra=None):
    """
    Write the result JSON to ``path`` and the objective trace to
    ``<stem>.trace.csv`` next to it. Returns both paths.
    """
    path = Path(path)
    doc = result_document(result, metrics, config, extra)
    path.parent.mkdir(parents=True, exist_ok=True)
    tpath = trace_path_for(path)
    with open(tpath, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iter", "unsquared", "weighted_squared"])
        for i, u, w in result.objective_trace:
            writer.writerow([int(i), repr(float(u)), repr(float(w))])
    # the JSON appears only once complete
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(doc, indent=2) + "\n")
    tmp.replace(path)
    return path, tpath


def read_result(path):
    return json.loads(Path(path).read_text())


def read_trace(path):
    with open(path, newline="") as fh:
        return [(int(r["iter"]), float(r["unsquared"]), float(r["weighted_squared"])) for r in csv.DictReader(fh)]
