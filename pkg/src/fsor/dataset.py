"""Labeled datasets stored feature-major (d x n), plus encoding helpers.

Features are kept with one row per feature and one column per sample so the
regression code can read shapes straight off ``X``.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

__all__ = [
    "DataError",
    "Dataset",
    "SynthSpec",
    "load_csv",
    "save_csv",
    "one_hot",
    "centering_matrix",
    "center_rows",
    "synthesize",
    "zscore",
]


class DataError(ValueError):
    """Raised for malformed or inconsistent input data."""


@dataclass(frozen=True)
class Dataset:
    """Feature matrix ``features`` of shape (d, n) with integer class labels.

    ``classes`` records the original label value of each dense class index.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: Optional[tuple] = None
    classes: Optional[tuple] = None

    def __post_init__(self):
        x = np.array(self.features, dtype=float)
        y = np.array(self.labels)
        if x.ndim != 2:
            raise DataError(f"features must be 2-D (d, n), got ndim={x.ndim}")
        d, n = x.shape
        if d < 1:
            raise DataError("dataset needs at least one feature")
        if n < 2:
            raise DataError("dataset needs at least two samples")
        if not np.all(np.isfinite(x)):
            raise DataError("features contain non-finite entries")
        if y.ndim != 1 or y.shape[0] != n:
            raise DataError(f"labels must have length {n}, got shape {y.shape}")
        if y.size and not np.issubdtype(y.dtype, np.integer):
            if not np.all(np.equal(np.mod(y, 1), 0)):
                raise DataError("labels must be integers")
        y = y.astype(np.int64)
        if y.min() < 0:
            raise DataError("labels must be nonnegative")
        k = int(y.max()) + 1
        if k < 2:
            raise DataError("dataset needs at least two classes")
        counts = np.bincount(y, minlength=k)
        if np.any(counts == 0):
            missing = np.flatnonzero(counts == 0).tolist()
            raise DataError(f"classes {missing} have no samples")
        if self.feature_names is not None and len(self.feature_names) != d:
            raise DataError(
                f"expected {d} feature names, got {len(self.feature_names)}")
        if self.classes is not None and len(self.classes) != k:
            raise DataError(f"expected {k} class names, got {len(self.classes)}")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)
        if self.feature_names is not None:
            object.__setattr__(self, "feature_names", tuple(self.feature_names))
        if self.classes is not None:
            object.__setattr__(self, "classes", tuple(self.classes))

    @property
    def n_features(self) -> int:
        return self.features.shape[0]

    @property
    def n_samples(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1

    def select(self, indices: Sequence[int]) -> "Dataset":
        """Return a dataset restricted to the given feature rows, in order."""
        idx = np.asarray(indices, dtype=np.int64)
        names = None
        if self.feature_names is not None:
            names = tuple(self.feature_names[i] for i in idx)
        return Dataset(self.features[idx], self.labels, names, self.classes)


@dataclass(frozen=True)
class SynthSpec:
    n_samples: int
    n_features: int
    n_informative: int
    n_classes: int = 2
    class_separation: float = 5.0
    noise_std: float = 1.0
    seed: int = 0

    def validate(self):
        for name in ("n_samples", "n_features", "n_informative", "n_classes"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise DataError(f"{name} must be a positive integer, got {value}")
        if self.n_informative > self.n_features:
            raise DataError("n_informative cannot exceed n_features")
        if self.n_classes < 2:
            raise DataError("n_classes must be at least 2")
        if self.n_classes > self.n_samples:
            raise DataError("n_classes cannot exceed n_samples")
        if not self.class_separation > 0:
            raise DataError("class_separation must be positive")
        if not self.noise_std >= 0:
            raise DataError("noise_std must be nonnegative")
        if not 0 <= self.seed < 2 ** 64:
            raise DataError("seed must fit in an unsigned 64-bit integer")


def _resolve_label_column(label_column, header):
    if isinstance(label_column, (int, np.integer)):
        return int(label_column)
    text = str(label_column)
    if header is not None and text in header:
        return header.index(text)
    try:
        return int(text)
    except ValueError:
        raise DataError(f"label column {text!r} not found in header") from None


def load_csv(path: Union[str, os.PathLike], label_column: Union[int, str] = -1,
             has_header: bool = True) -> Dataset:
    """Read a one-sample-per-row CSV into a feature-major :class:`Dataset`.

    Parameters
    ----------
    path : path-like
        UTF-8 comma-separated file.
    label_column : int or str
        Header name or zero-based index (negative indexes count from the end).
    has_header : bool
        Whether the first row holds column names.

    Returns
    -------
    Dataset
        Features transposed to (d, n). Labels are remapped to ``0..k-1`` in
        order of first appearance; ``classes`` keeps the original values.
    """
    if not os.path.isfile(path):
        raise DataError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    if not rows:
        raise DataError(f"{path} is empty")
    header = [c.strip() for c in rows[0]] if has_header else None
    body = rows[1:] if has_header else rows
    if not body:
        raise DataError(f"{path} has no data rows")

    width = len(header) if header is not None else len(body[0])
    for lineno, row in enumerate(body, start=2 if has_header else 1):
        if len(row) != width:
            raise DataError(
                f"ragged rows: line {lineno} has {len(row)} fields, expected {width}")

    col = _resolve_label_column(label_column, header)
    if col < 0:
        col += width
    if not 0 <= col < width:
        raise DataError(f"label column index {col} out of range for {width} columns")
    if width < 2:
        raise DataError("need at least one feature column besides the label")

    feature_cols = [j for j in range(width) if j != col]
    values = np.empty((len(body), len(feature_cols)))
    raw_labels = []
    for i, row in enumerate(body):
        raw_labels.append(row[col].strip())
        for jj, j in enumerate(feature_cols):
            cell = row[j].strip()
            try:
                values[i, jj] = float(cell)
            except ValueError:
                raise DataError(
                    f"non-numeric feature value {cell!r} in row {i + 1}, column {j}"
                ) from None

    classes: list = []
    index = {}
    labels = np.empty(len(raw_labels), dtype=np.int64)
    for i, lab in enumerate(raw_labels):
        if lab not in index:
            index[lab] = len(classes)
            classes.append(lab)
        labels[i] = index[lab]
    if len(classes) < 2:
        raise DataError("a class with zero samples: only one label value present")

    names = tuple(header[j] for j in feature_cols) if header is not None else None
    return Dataset(values.T, labels, names, tuple(classes))


def save_csv(dataset: Dataset, path, label_name: str = "label") -> None:
    """Write ``dataset`` one sample per row, label last, with a header row.

    ``path`` may also be an open text stream.
    """
    d = dataset.n_features
    names = dataset.feature_names or tuple(f"f{j}" for j in range(d))
    classes = dataset.classes
    if hasattr(path, "write"):
        _write_rows(path, dataset, names, classes, label_name)
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        _write_rows(fh, dataset, names, classes, label_name)


def _write_rows(fh, dataset, names, classes, label_name):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(list(names) + [label_name])
    for i in range(dataset.n_samples):
        lab = dataset.labels[i]
        writer.writerow([repr(float(v)) for v in dataset.features[:, i]]
                        + [classes[lab] if classes is not None else int(lab)])


def one_hot(labels, k: int) -> np.ndarray:
    """Return the (k, n) indicator matrix with ``Y[c, i] = 1`` iff ``labels[i] == c``."""
    y = np.asarray(labels)
    if y.ndim != 1:
        raise DataError("labels must be a 1-D sequence")
    y = y.astype(np.int64)
    if y.size and (y.min() < 0 or y.max() >= k):
        raise DataError(f"labels must lie in 0..{k - 1}")
    out = np.zeros((k, y.size))
    out[y, np.arange(y.size)] = 1.0
    return out


def centering_matrix(n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be at least 1")
    return np.eye(n) - np.full((n, n), 1.0 / n)


def center_rows(m: np.ndarray) -> np.ndarray:
    """Compute ``m @ H`` by subtracting each row's mean."""
    m = np.asarray(m, dtype=float)
    return m - m.mean(axis=1, keepdims=True)


def zscore(x: np.ndarray, mean=None, std=None):
    """Standardize rows of a (d, n) matrix; constant rows are only centered.

    Returns the scaled matrix along with the statistics used, so training
    statistics can be reapplied to held-out samples.
    """
    x = np.asarray(x, dtype=float)
    if mean is None:
        mean = x.mean(axis=1, keepdims=True)
    if std is None:
        std = x.std(axis=1, keepdims=True)
        std = np.where(std > 0, std, 1.0)
    return (x - mean) / std, mean, std


def synthesize(spec: SynthSpec) -> Dataset:
    """Draw a Gaussian class-conditional dataset with a planted informative set.

    Features ``0..n_informative-1`` have class means spaced
    ``class_separation`` apart (class ``c`` centered at
    ``(c - (k-1)/2) * class_separation``); all features carry
    ``N(0, noise_std**2)`` noise. Classes are balanced to within one sample.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n, d, k = spec.n_samples, spec.n_features, spec.n_classes
    labels = rng.permutation(np.arange(n) % k)
    features = spec.noise_std * rng.standard_normal((d, n))
    offsets = (np.arange(k) - (k - 1) / 2.0) * spec.class_separation
    features[: spec.n_informative] += offsets[labels]
    names = tuple(f"f{j}" for j in range(d))
    return Dataset(features, labels, names, tuple(range(k)))
