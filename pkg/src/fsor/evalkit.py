"""Repeated random-split KNN evaluation of feature rankings."""
from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .dataset import Dataset, zscore

__all__ = [
    "SplitSpec",
    "SizeResult",
    "EvalReport",
    "knn_classify",
    "confusion_matrix",
    "sensitivity_specificity",
    "make_splits",
    "evaluate_ranking",
    "load_ranking",
]


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.7
    n_trials: int = 100
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must lie in (0, 1)")
        if self.n_trials < 1:
            raise ValueError("n_trials must be positive")


@dataclass
class SizeResult:
    m: int
    mean_accuracy: float
    std_accuracy: float
    macro_sensitivity: float
    macro_specificity: float


@dataclass
class EvalReport:
    per_size: List[SizeResult]
    classifier_name: str
    n_trials: int = 0
    excluded_class_trials: int = 0
    accuracies: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "classifier": self.classifier_name,
            "n_trials": self.n_trials,
            "excluded_class_trials": self.excluded_class_trials,
            "per_size": [asdict(r) for r in self.per_size],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        """Tidy CSV with one row per (m, metric)."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["m", "metric", "value"])
        for r in self.per_size:
            for metric in ("mean_accuracy", "std_accuracy",
                           "macro_sensitivity", "macro_specificity"):
                writer.writerow([r.m, metric, repr(float(getattr(r, metric)))])
        return buf.getvalue()


def knn_classify(train_x, train_labels, test_x, k_neighbors: int = 5,
                 chunk: int = 256) -> np.ndarray:
    """Majority-vote k-nearest-neighbor prediction with Euclidean distance.

    Samples are columns, matching :class:`Dataset`. Among equidistant
    training points the lower index wins; among tied vote counts the
    smallest class index wins.
    """
    train_x = np.asarray(train_x, dtype=float)
    test_x = np.asarray(test_x, dtype=float)
    train_labels = np.asarray(train_labels, dtype=np.int64)
    if train_x.ndim == 1:
        train_x = train_x[None, :]
    if test_x.ndim == 1:
        test_x = test_x[None, :]
    n_train = train_x.shape[1]
    if n_train == 0:
        raise ValueError("training set is empty")
    if train_labels.shape != (n_train,):
        raise ValueError("need one label per training sample")
    if test_x.shape[0] != train_x.shape[0]:
        raise ValueError(
            f"feature dimensions differ: train {train_x.shape[0]}, test {test_x.shape[0]}")
    if k_neighbors < 1:
        raise ValueError("k_neighbors must be positive")
    if k_neighbors > n_train:
        warnings.warn(f"k_neighbors={k_neighbors} exceeds training size; using {n_train}",
                      RuntimeWarning, stacklevel=2)
        k_neighbors = n_train

    n_classes = int(train_labels.max()) + 1
    train_t = train_x.T
    out = np.empty(test_x.shape[1], dtype=np.int64)
    for start in range(0, test_x.shape[1], chunk):
        block = test_x[:, start:start + chunk].T
        diff = block[:, None, :] - train_t[None, :, :]
        dist = np.einsum("ijk,ijk->ij", diff, diff)
        nearest = np.argsort(dist, axis=1, kind="stable")[:, :k_neighbors]
        votes = np.zeros((block.shape[0], n_classes), dtype=np.int64)
        np.add.at(votes, (np.arange(block.shape[0])[:, None], train_labels[nearest]), 1)
        out[start:start + block.shape[0]] = np.argmax(votes, axis=1)
    return out


def confusion_matrix(true, pred, k: int) -> np.ndarray:
    """Counts with rows indexed by true class and columns by prediction."""
    cm = np.zeros((k, k), dtype=np.int64)
    np.add.at(cm, (np.asarray(true), np.asarray(pred)), 1)
    return cm


def sensitivity_specificity(confusion) -> tuple:
    """Macro-averaged one-vs-rest sensitivity and specificity.

    Only classes with at least one true sample enter the averages.
    """
    cm = np.asarray(confusion, dtype=float)
    total = cm.sum()
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1] or total <= 0 or np.any(cm < 0):
        raise ValueError("confusion must be a square nonnegative matrix with a positive total")
    tp = np.diag(cm)
    fn = cm.sum(axis=1) - tp
    fp = cm.sum(axis=0) - tp
    tn = total - tp - fn - fp
    present = (tp + fn) > 0
    sens = tp[present] / (tp + fn)[present]
    neg = (tn + fp)[present]
    spec = np.where(neg > 0, tn[present] / np.where(neg > 0, neg, 1.0), 1.0)
    return float(sens.mean()), float(spec.mean())


def make_splits(labels, split: SplitSpec) -> list:
    """Pre-draw ``n_trials`` (train, test) index pairs from ``split.seed``.

    Stratified splits put ``round(train_fraction * n_c)`` samples of each
    class into training.
    """
    labels = np.asarray(labels)
    n = labels.size
    rng = np.random.default_rng(split.seed)
    splits = []
    for _ in range(split.n_trials):
        if split.stratified:
            train = []
            for c in np.unique(labels):
                members = np.flatnonzero(labels == c)
                members = members[rng.permutation(members.size)]
                train.append(members[: int(round(split.train_fraction * members.size))])
            train = np.sort(np.concatenate(train))
        else:
            perm = rng.permutation(n)
            train = np.sort(perm[: int(round(split.train_fraction * n))])
        mask = np.zeros(n, dtype=bool)
        mask[train] = True
        splits.append((train, np.flatnonzero(~mask)))
    return splits


def _check_ranking(ranking, d: int) -> np.ndarray:
    ranking = np.asarray(ranking)
    if ranking.ndim != 1 or ranking.size != d or not np.array_equal(np.sort(ranking), np.arange(d)):
        raise ValueError(f"ranking must be a permutation of 0..{d - 1}")
    return ranking.astype(np.int64)


def evaluate_ranking(dataset: Dataset, ranking, sizes: Sequence[int],
                     split: Optional[SplitSpec] = None, k_neighbors: int = 5,
                     normalize: bool = False) -> EvalReport:
    """Score the top-``m`` features of ``ranking`` for each ``m`` in ``sizes``.

    Every size sees the same sequence of splits, so differences between
    sizes (and between rankings evaluated with the same seed) are paired.
    With ``normalize`` each trial z-scores features using training
    statistics only.
    """
    split = split or SplitSpec()
    d = dataset.n_features
    ranking = _check_ranking(ranking, d)
    sizes = sorted({int(m) for m in sizes})
    if not sizes or sizes[0] < 1 or sizes[-1] > d:
        raise ValueError(f"sizes must lie within 1..{d}")
    k = dataset.n_classes
    x, y = dataset.features, dataset.labels
    splits = make_splits(y, split)

    acc = np.empty((len(sizes), split.n_trials))
    sens = np.empty_like(acc)
    spec = np.empty_like(acc)
    excluded = 0
    with warnings.catch_warnings():
        warnings.simplefilter("once", RuntimeWarning)
        for t, (train, test) in enumerate(splits):
            missing = k - np.unique(y[test]).size
            excluded += missing
            for i, m in enumerate(sizes):
                cols = ranking[:m]
                xtr, xte = x[np.ix_(cols, train)], x[np.ix_(cols, test)]
                if normalize:
                    xtr, mean, std = zscore(xtr)
                    xte = zscore(xte, mean, std)[0]
                pred = knn_classify(xtr, y[train], xte, k_neighbors)
                cm = confusion_matrix(y[test], pred, k)
                acc[i, t] = np.trace(cm) / cm.sum()
                sens[i, t], spec[i, t] = sensitivity_specificity(cm)

    per_size = [
        SizeResult(m, float(acc[i].mean()), float(acc[i].std()),
                   float(sens[i].mean()), float(spec[i].mean()))
        for i, m in enumerate(sizes)
    ]
    return EvalReport(per_size, f"knn(k={k_neighbors})", split.n_trials,
                      excluded, acc)


def load_ranking(path, d: Optional[int] = None) -> np.ndarray:
    """Read the ``"ranking"`` integer array from a JSON file."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or "ranking" not in doc:
        raise ValueError(f"{path} has no 'ranking' array")
    values = doc["ranking"]
    if not isinstance(values, list) or not all(
            isinstance(v, int) and not isinstance(v, bool) for v in values):
        raise ValueError("'ranking' must be a list of integers")
    ranking = np.array(values, dtype=np.int64)
    if d is not None:
        ranking = _check_ranking(ranking, d)
    return ranking
