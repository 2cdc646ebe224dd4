"""Filter-style reference scorers: Fisher score and correlation coefficient."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, one_hot
from .model import rank_by_scores

__all__ = ["FeatureScores", "fisher_score", "correlation_score", "FISHER_CAP"]

FISHER_CAP = 1e12


@dataclass
class FeatureScores:
    scores: np.ndarray
    method_name: str
    ranking: np.ndarray

    @classmethod
    def from_scores(cls, scores, method_name: str) -> "FeatureScores":
        scores = np.asarray(scores, dtype=float)
        if not np.all(np.isfinite(scores)):
            raise ValueError("scores must be finite")
        return cls(scores, method_name, rank_by_scores(scores))

    def to_dict(self) -> dict:
        return {
            "method": self.method_name,
            "scores": self.scores.tolist(),
            "ranking": [int(i) for i in self.ranking],
        }


def fisher_score(dataset: Dataset) -> FeatureScores:
    """Per-feature ratio of between-class to within-class scatter.

    ``F_j = sum_c n_c (mu_cj - mu_j)^2 / sum_c n_c var_cj`` with population
    variances. A zero denominator gives ``FISHER_CAP`` when the numerator is
    positive and 0 otherwise.
    """
    x = dataset.features
    y = one_hot(dataset.labels, dataset.n_classes)
    counts = y.sum(axis=1)
    class_means = (x @ y.T) / counts
    overall = x.mean(axis=1, keepdims=True)
    between = ((class_means - overall) ** 2) @ counts
    resid = x - class_means[:, dataset.labels]
    within = np.sum(resid ** 2, axis=1)

    # Round-off in the class means should not make a separator look noisy.
    scale = np.maximum(np.abs(x).max(axis=1), 1.0) ** 2 * x.shape[1]
    within = np.where(within <= 1e-24 * scale, 0.0, within)
    between = np.where(between <= 1e-24 * scale, 0.0, between)
    with np.errstate(divide="ignore", invalid="ignore"):
        scores = np.where(within > 0, between / within,
                          np.where(between > 0, FISHER_CAP, 0.0))
    return FeatureScores.from_scores(np.minimum(scores, FISHER_CAP), "fisher")


def correlation_score(dataset: Dataset) -> FeatureScores:
    """Max over classes of |Pearson(feature, one-vs-rest class indicator)|.

    Terms where either side has zero variance count as 0.
    """
    raw = dataset.features
    x = raw - raw.mean(axis=1, keepdims=True)
    y = one_hot(dataset.labels, dataset.n_classes)
    y = y - y.mean(axis=1, keepdims=True)
    xn = np.sqrt(np.sum(x * x, axis=1))
    # A constant feature leaves only round-off after centering.
    xn = np.where(xn <= 1e-12 * np.abs(raw).max(axis=1) * np.sqrt(raw.shape[1]), 0.0, xn)
    yn = np.sqrt(np.sum(y * y, axis=1))
    denom = np.outer(xn, yn)
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = np.where(denom > 0, (x @ y.T) / denom, 0.0)
    scores = np.clip(np.max(np.abs(corr), axis=1), 0.0, 1.0)
    return FeatureScores.from_scores(scores, "cc")
