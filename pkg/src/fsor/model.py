"""Feature selection by orthogonal regression with simplex feature weights.

The model fits ``min ||W' diag(theta) X + b 1' - Y||_F^2`` over an
orthonormal ``W`` (d x k), a bias ``b`` and weights ``theta`` on the
probability simplex. Eliminating ``b`` leaves the centered problem
``||W' diag(theta) X H - Y H||_F^2``, which is minimized by alternating a
Stiefel-manifold step for ``W`` and a simplex QP for ``theta``.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .dataset import Dataset, center_rows, one_hot
from .gpi import GpiConfig, QpsmProblem, gpi_solve, random_stiefel
from .simplex_qp import AlmConfig, SimplexQp, alm_solve, qp_objective

__all__ = [
    "FsorConfig",
    "FsorResult",
    "objective",
    "compute_bias",
    "fit",
    "rank_features",
    "rank_by_scores",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FsorConfig:
    outer_max_iter: int = 100
    outer_tol: float = 1e-6
    seed: int = 0
    gpi: GpiConfig = field(default_factory=lambda: GpiConfig(max_iter=50))
    alm: AlmConfig = field(default_factory=lambda: AlmConfig(max_iter=200))

    def __post_init__(self):
        if self.outer_max_iter < 1:
            raise ValueError("outer_max_iter must be positive")
        if not self.outer_tol >= 0:
            raise ValueError("outer_tol must be nonnegative")


@dataclass
class FsorResult:
    w: np.ndarray
    theta: np.ndarray
    bias: np.ndarray
    objective_trace: np.ndarray
    ranking: np.ndarray
    converged: bool
    iterations: int
    config: Optional[FsorConfig] = None

    def to_dict(self) -> dict:
        out = {
            "method": "fsor",
            "theta": self.theta.tolist(),
            "ranking": [int(i) for i in self.ranking],
            "objective_trace": self.objective_trace.tolist(),
            "bias": self.bias.tolist(),
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
        }
        if self.config is not None:
            out["config"] = asdict(self.config)
        return out


def _check_shapes(x, y, w, theta):
    d, n = x.shape
    if y.shape[1] != n:
        raise ValueError(f"y has {y.shape[1]} columns, x has {n}")
    if w.shape != (d, y.shape[0]):
        raise ValueError(f"w must be {d}x{y.shape[0]}, got {w.shape}")
    if theta.shape != (d,):
        raise ValueError(f"theta must have length {d}, got {theta.shape}")


def compute_bias(x, y_onehot, w, theta) -> np.ndarray:
    """Closed-form optimal bias ``(Y 1 - W' diag(theta) X 1) / n``."""
    x, y, w, theta = (np.asarray(v, dtype=float) for v in (x, y_onehot, w, theta))
    _check_shapes(x, y, w, theta)
    return y.mean(axis=1) - w.T @ (theta * x.mean(axis=1))


def objective(x, y_onehot, w, theta, centered: bool = True) -> float:
    """Squared Frobenius residual of the weighted orthogonal regression.

    With ``centered=True`` this is ``||W' diag(theta) X H - Y H||_F^2``, with
    ``H`` applied by subtracting row means. Otherwise the bias is solved for
    and ``||W' diag(theta) X + b 1' - Y||_F^2`` is returned; the two agree at
    the optimal bias.
    """
    x, y, w, theta = (np.asarray(v, dtype=float) for v in (x, y_onehot, w, theta))
    _check_shapes(x, y, w, theta)
    if centered:
        r = w.T @ (theta[:, None] * center_rows(x)) - center_rows(y)
    else:
        bias = compute_bias(x, y, w, theta)
        r = w.T @ (theta[:, None] * x) + bias[:, None] - y
    return float(np.sum(r * r))


def rank_by_scores(scores) -> np.ndarray:
    """Indices by descending score; ties go to the lower index."""
    return np.argsort(-np.asarray(scores, dtype=float), kind="stable")


def rank_features(result: FsorResult) -> np.ndarray:
    return rank_by_scores(result.theta)


def fit(dataset: Dataset, config: Optional[FsorConfig] = None,
        fixed_iterations: bool = False) -> FsorResult:
    """Learn feature weights by alternating the W- and theta-subproblems.

    Parameters
    ----------
    dataset : Dataset
    config : FsorConfig, optional
    fixed_iterations : bool
        Run exactly ``outer_max_iter`` outer iterations instead of stopping
        on ``outer_tol``. ``converged`` then reports whether the last
        relative objective change was below ``outer_tol``.

    Returns
    -------
    FsorResult
        ``objective_trace[t]`` is the centered objective after outer
        iteration ``t + 1``.
    """
    config = config or FsorConfig()
    x = dataset.features
    d, n = x.shape
    k = dataset.n_classes
    if k > d:
        raise ValueError(f"need at least as many features as classes (k={k} > d={d})")
    y = one_hot(dataset.labels, k)

    xc = center_rows(x)
    yc = center_rows(y)
    flat = np.flatnonzero(np.all(xc == 0.0, axis=1))
    if flat.size:
        warnings.warn(f"features {flat.tolist()} are constant and carry no signal",
                      RuntimeWarning, stacklevel=2)
    # Both products are fixed across iterations; every later step is O(d^2 k).
    scatter = xc @ xc.T
    scatter = 0.5 * (scatter + scatter.T)
    cross = xc @ yc.T

    theta = np.full(d, 1.0 / d)
    w = random_stiefel(d, k, config.seed)
    trace = []
    converged = False
    it = 0
    while it < config.outer_max_iter:
        it += 1
        a_w = theta[:, None] * scatter * theta[None, :]
        sol = gpi_solve(QpsmProblem(a_w, theta[:, None] * cross), config.gpi, w0=w)
        w = sol.w

        qp = SimplexQp(scatter * (w @ w.T), 2.0 * np.sum(cross * w, axis=1))
        res = alm_solve(qp, config.alm, theta0=theta)
        # The ALM point is only asymptotically optimal; never accept a step
        # that increases the subproblem objective.
        if qp_objective(qp, res.theta) <= qp_objective(qp, theta):
            theta = res.theta
        log.debug("outer %d: gpi %d iters, alm %d iters (converged=%s)",
                  it, sol.iterations, res.iterations, res.converged)

        trace.append(objective(x, y, w, theta))
        if len(trace) > 1:
            prev = trace[-2]
            change = abs(prev - trace[-1]) / max(abs(prev), np.finfo(float).tiny)
            converged = change < config.outer_tol
            if converged and not fixed_iterations:
                break

    bias = compute_bias(x, y, w, theta)
    return FsorResult(w, theta, bias, np.array(trace), rank_by_scores(theta),
                      converged, it, config)
