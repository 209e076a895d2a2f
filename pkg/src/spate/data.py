"""Benchmark datasets: synthetic generators, CSV ingestion and fold planning."""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DatasetNotFoundError,
    InvalidArgumentError,
    InvalidDatasetError,
    NonNumericFeatureError,
)

# generator defaults; echoed into every report's provenance block
MOONS_NOISE = 0.2
CIRCLES_NOISE = 0.1
CIRCLES_FACTOR = 0.5
BLOBS_SPREAD = 1.0
BLOBS_CENTER_BOX = (-10.0, 10.0)

DATA_DIR_ENV = "SPATE_DATA_DIR"


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    name: str
    n_classes: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.ndim != 2 or self.X.shape[1] < 1:
            raise InvalidDatasetError(f"X must be a 2-D matrix with d >= 1, got shape {self.X.shape}")
        if self.X.shape[0] != self.y.shape[0]:
            raise InvalidDatasetError("X and y have different lengths")
        present = np.unique(self.y)
        if not np.array_equal(present, np.arange(self.n_classes)):
            raise InvalidDatasetError(f"labels must cover 0..{self.n_classes - 1}, got {present.tolist()}")

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]


def gen_moons(n: int = 300, noise: float = MOONS_NOISE, seed: int = 0) -> Dataset:
    """Two interleaving half circles with additive Gaussian noise."""
    if n < 4:
        raise InvalidArgumentError(f"gen_moons needs n >= 4, got {n}")
    if noise < 0:
        raise InvalidArgumentError("noise must be non-negative")
    n_out = n // 2
    n_in = n - n_out
    t_out = np.linspace(0.0, np.pi, n_out)
    t_in = np.linspace(0.0, np.pi, n_in)
    X = np.vstack([
        np.column_stack([np.cos(t_out), np.sin(t_out)]),
        np.column_stack([1.0 - np.cos(t_in), 0.5 - np.sin(t_in)]),
    ])
    y = np.concatenate([np.zeros(n_out), np.ones(n_in)])
    rng = np.random.default_rng(seed)
    X = X + noise * rng.standard_normal(X.shape)
    return Dataset(X, y, "moons", 2, {"generator": "moons", "n": n, "noise": noise, "seed": seed})


def gen_circles(n: int = 300, noise: float = CIRCLES_NOISE, factor: float = CIRCLES_FACTOR,
                seed: int = 0) -> Dataset:
    """Outer unit circle (class 0) around an inner circle of radius ``factor`` (class 1)."""
    if n < 4:
        raise InvalidArgumentError(f"gen_circles needs n >= 4, got {n}")
    if not 0.0 < factor < 1.0:
        raise InvalidArgumentError(f"factor must be in (0, 1), got {factor}")
    if noise < 0:
        raise InvalidArgumentError("noise must be non-negative")
    n_out = n // 2
    n_in = n - n_out
    t_out = np.linspace(0.0, 2 * np.pi, n_out, endpoint=False)
    t_in = np.linspace(0.0, 2 * np.pi, n_in, endpoint=False)
    X = np.vstack([
        np.column_stack([np.cos(t_out), np.sin(t_out)]),
        factor * np.column_stack([np.cos(t_in), np.sin(t_in)]),
    ])
    y = np.concatenate([np.zeros(n_out), np.ones(n_in)])
    rng = np.random.default_rng(seed)
    X = X + noise * rng.standard_normal(X.shape)
    return Dataset(X, y, "circles", 2,
                   {"generator": "circles", "n": n, "noise": noise, "factor": factor, "seed": seed})


def gen_blobs(n: int = 300, d: int = 5, centers: int = 3, spread: float = BLOBS_SPREAD,
              seed: int = 0) -> Dataset:
    """Isotropic Gaussian clusters around centers drawn uniformly from a box."""
    if n < centers:
        raise InvalidArgumentError(f"gen_blobs needs n >= centers ({centers}), got {n}")
    if d < 1 or centers < 1:
        raise InvalidArgumentError("d and centers must be positive")
    if spread < 0:
        raise InvalidArgumentError("spread must be non-negative")
    rng = np.random.default_rng(seed)
    lo, hi = BLOBS_CENTER_BOX
    C = rng.uniform(lo, hi, size=(centers, d))
    sizes = np.full(centers, n // centers)
    sizes[: n % centers] += 1
    y = np.repeat(np.arange(centers), sizes)
    X = C[y] + spread * rng.standard_normal((n, d))
    return Dataset(X, y, "blobs", centers,
                   {"generator": "blobs", "n": n, "d": d, "centers": centers, "spread": spread, "seed": seed})


def _resolve_label_column(header: list[str], label_column) -> int:
    if isinstance(label_column, int):
        idx = label_column
    elif label_column in header:
        idx = header.index(label_column)
    else:
        try:
            idx = int(label_column)
        except (TypeError, ValueError):
            raise InvalidArgumentError(f"label column {label_column!r} not in header {header}") from None
    if idx < 0:
        idx += len(header)
    if not 0 <= idx < len(header):
        raise InvalidArgumentError(f"label column index {label_column} out of range")
    return idx


def _label_key(value: str):
    # numeric labels sort numerically, anything else lexicographically
    try:
        return (0, float(value), value)
    except ValueError:
        return (1, 0.0, value)


def load_csv(path, label_column="label", name: str | None = None) -> Dataset:
    """Read a headed CSV; every non-label column must be numeric.

    Labels are re-encoded to ``0..C-1`` in sorted order of their unique values.
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetNotFoundError(f"no such CSV file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InvalidDatasetError(f"{path} is empty")
    header, body = rows[0], [r for r in rows[1:] if r]
    li = _resolve_label_column(header, label_column)
    feats, labels = [], []
    for lineno, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise InvalidDatasetError(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
        values = []
        for j, cell in enumerate(row):
            if j == li:
                continue
            try:
                values.append(float(cell))
            except ValueError:
                raise NonNumericFeatureError(
                    f"{path}:{lineno}: column {header[j]!r} has non-numeric value {cell!r}") from None
        feats.append(values)
        labels.append(row[li].strip())
    classes = sorted(set(labels), key=_label_key)
    if len(classes) < 2:
        raise InvalidDatasetError(f"{path} contains fewer than two classes")
    lookup = {c: i for i, c in enumerate(classes)}
    y = np.array([lookup[v] for v in labels])
    X = np.array(feats, dtype=float).reshape(len(body), len(header) - 1)
    return Dataset(X, y, name or path.stem, len(classes),
                   {"source": str(path), "label_column": header[li], "classes": classes})


def default_data_dir() -> Path:
    return Path(os.environ.get(DATA_DIR_ENV, "data"))


@dataclass
class FoldPlan:
    n_folds: int
    assignments: np.ndarray
    seed: int

    def test_indices(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == k)

    def train_indices(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != k)

    def splits(self):
        for k in range(self.n_folds):
            yield self.train_indices(k), self.test_indices(k)


def stratified_kfold(y, n_folds: int = 5, seed: int = 0) -> FoldPlan:
    """Shuffle each class with a seeded generator and deal its members round-robin.

    Dealing continues across classes, so per-class fold counts differ by at
    most one and total fold sizes stay balanced.
    """
    y = np.asarray(y)
    if n_folds < 2:
        raise InvalidArgumentError(f"need at least 2 folds, got {n_folds}")
    classes, counts = np.unique(y, return_counts=True)
    if counts.min() < n_folds:
        small = classes[np.argmin(counts)]
        raise InvalidArgumentError(f"class {small} has {counts.min()} members, fewer than {n_folds} folds")
    rng = np.random.default_rng(seed)
    assignments = np.empty(len(y), dtype=np.int64)
    offset = 0
    for c in classes:
        members = rng.permutation(np.flatnonzero(y == c))
        assignments[members] = (offset + np.arange(len(members))) % n_folds
        offset += len(members)
    return FoldPlan(n_folds, assignments, seed)
