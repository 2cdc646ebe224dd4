"""Augmented Lagrangian solver for ``min theta'A theta - theta'b`` on the simplex.

The constraint ``theta >= 0`` is moved onto a splitting variable ``v`` with
``v = theta``; each sweep performs one exact theta-minimization, one
projection for ``v``, then dual ascent on both multipliers and a geometric
increase of the penalty ``mu``, capped at ``mu_max``. Without the cap the
single-sweep scheme stalls at feasible but suboptimal points once the
penalty dominates the objective.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

__all__ = [
    "SimplexQp",
    "AlmState",
    "AlmConfig",
    "AlmResult",
    "hadamard_quadratic",
    "alm_theta_step",
    "alm_v_step",
    "alm_solve",
    "qp_objective",
    "project_to_simplex",
]


@dataclass(frozen=True)
class SimplexQp:
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        b = np.array(self.b, dtype=float).ravel()
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"a must be square, got shape {a.shape}")
        if b.shape[0] != a.shape[0]:
            raise ValueError(f"b must have length {a.shape[0]}, got {b.shape[0]}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("problem data must be finite")
        if np.max(np.abs(a - a.T), initial=0.0) > 1e-10 * max(1.0, np.max(np.abs(a))):
            raise ValueError("a must be symmetric")
        a = 0.5 * (a + a.T)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def d(self) -> int:
        return self.b.shape[0]


@dataclass(frozen=True)
class AlmState:
    theta: np.ndarray
    v: np.ndarray
    lambda1: np.ndarray
    lambda2: float
    mu: float
    rho: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not self.rho > 1:
            raise ValueError("rho must exceed 1")

    @classmethod
    def initial(cls, theta0, mu: float, rho: float) -> "AlmState":
        theta0 = np.asarray(theta0, dtype=float)
        return cls(theta0.copy(), theta0.copy(), np.zeros_like(theta0), 0.0, mu, rho)


@dataclass(frozen=True)
class AlmConfig:
    rho: float = 1.05
    mu0: float = 1.0
    mu_max: float = 3.0
    max_iter: int = 1000
    feas_tol: float = 1e-8
    stall_tol: float = 1e-12

    def __post_init__(self):
        if not 1 < self.rho <= 2:
            raise ValueError("rho must lie in (1, 2]")
        if not self.mu0 > 0:
            raise ValueError("mu0 must be positive")
        if not self.mu_max >= self.mu0:
            raise ValueError("mu_max must be at least mu0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if not (self.feas_tol > 0 and self.stall_tol > 0):
            raise ValueError("tolerances must be positive")


@dataclass
class AlmResult:
    theta: np.ndarray
    converged: bool
    iterations: int
    violation_trace: np.ndarray
    objective_trace: np.ndarray


def hadamard_quadratic(s, a, b) -> float:
    """Evaluate ``s'(A' * B)s``, which equals ``Tr(diag(s) A diag(s) B)``."""
    s = np.asarray(s, dtype=float).ravel()
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = s.shape[0]
    if a.shape != (n, n) or b.shape != (n, n):
        raise ValueError(
            f"expected {n}x{n} matrices, got {a.shape} and {b.shape}")
    return float(s @ ((a.T * b) @ s))


def qp_objective(qp: SimplexQp, theta) -> float:
    theta = np.asarray(theta, dtype=float)
    return float(theta @ qp.a @ theta - theta @ qp.b)


def _rhs(state: AlmState, b: np.ndarray) -> np.ndarray:
    mu = state.mu
    return mu * state.v + mu - state.lambda2 - state.lambda1 + b


def alm_theta_step(state: AlmState, qp: SimplexQp) -> np.ndarray:
    """Exact theta-minimization of the augmented Lagrangian with ``v`` fixed.

    Solves ``E theta = f`` with ``E = 2A + mu*I + mu*11'`` and
    ``f = mu*v + mu*1 - lambda2*1 - lambda1 + b`` by Cholesky.
    """
    d = qp.d
    e = 2.0 * qp.a + state.mu * (np.eye(d) + np.ones((d, d)))
    f = _rhs(state, qp.b)
    try:
        factor = linalg.cho_factor(e, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise ValueError("E is not positive definite; is A positive semidefinite?") from exc
    return linalg.cho_solve(factor, f, check_finite=False)


def alm_v_step(theta, lambda1, mu: float) -> np.ndarray:
    if not mu > 0:
        raise ValueError("mu must be positive")
    return np.maximum(np.asarray(theta, dtype=float) + np.asarray(lambda1) / mu, 0.0)


def project_to_simplex(theta) -> np.ndarray:
    """Clamp entries to be nonnegative and rescale to unit sum.

    Meant for iterates that are already nearly feasible; it is not the
    Euclidean projection.
    """
    theta = np.maximum(np.asarray(theta, dtype=float), 0.0)
    total = theta.sum()
    if total <= 0.0:
        return np.full(theta.shape, 1.0 / theta.size)
    return theta / total


class _ShiftedSolver:
    """Solve ``(2A + mu*I + mu*11') x = f`` for many ``mu`` values.

    ``2A`` is diagonalized once; each solve is then two matrix-vector
    products plus a Sherman-Morrison correction for the ``mu*11'`` term.
    """

    def __init__(self, a: np.ndarray):
        evals, self.q = linalg.eigh(2.0 * a, check_finite=False)
        # PSD input: round-off negatives are clipped.
        self.evals = np.maximum(evals, 0.0)
        self.q1 = self.q.T @ np.ones(a.shape[0])

    def solve(self, mu: float, f: np.ndarray) -> np.ndarray:
        inv = 1.0 / (self.evals + mu)
        z = inv * (self.q.T @ f)
        w = inv * self.q1
        coef = mu * (self.q1 @ z) / (1.0 + mu * (self.q1 @ w))
        return self.q @ (z - coef * w)


def _violation(theta, v) -> float:
    return max(float(np.max(np.abs(theta - v))), abs(float(theta.sum()) - 1.0))


def alm_solve(qp: SimplexQp, config: Optional[AlmConfig] = None,
              theta0=None) -> AlmResult:
    """Minimize ``theta'A theta - theta'b`` over the probability simplex.

    Parameters
    ----------
    qp : SimplexQp
        ``A`` must be positive semidefinite.
    config : AlmConfig, optional
    theta0 : array_like, optional
        Starting point, uniform ``1/d`` by default. ``v`` starts equal to it
        and both multipliers at zero.

    Returns
    -------
    AlmResult
        ``theta`` is exactly on the simplex after the final clamp-and-rescale.
        ``converged`` is False when ``max_iter`` ran out before both the
        constraint violation ``max(|theta - v|_inf, |sum(theta) - 1|)`` and
        the dual residual ``mu * |v - v_prev|_inf`` fell below ``feas_tol``
        (or theta stopped moving by more than ``stall_tol``); the last
        iterate is still projected and returned.
    """
    config = config or AlmConfig()
    d = qp.d
    if theta0 is None:
        theta0 = np.full(d, 1.0 / d)
    theta0 = np.asarray(theta0, dtype=float)
    if theta0.shape != (d,):
        raise ValueError(f"theta0 must have length {d}")

    # The minimizer is unchanged by scaling the objective; scaling makes
    # mu0 comparable to the curvature regardless of the data's units.
    scale = max(float(np.max(np.abs(qp.a))), float(np.max(np.abs(qp.b))), 0.0)
    if not scale > 0:
        scale = 1.0
    a = qp.a / scale
    b = qp.b / scale
    solver = _ShiftedSolver(a)

    state = AlmState.initial(theta0, config.mu0, config.rho)
    theta, v, lam1, lam2, mu = state.theta, state.v, state.lambda1, state.lambda2, state.mu
    violations = []
    objectives = []
    converged = False
    it = 0
    while it < config.max_iter:
        it += 1
        f = mu * v + mu - lam2 - lam1 + b
        theta_new = solver.solve(mu, f)
        v_old = v
        v = np.maximum(theta_new + lam1 / mu, 0.0)
        lam1 = lam1 + mu * (theta_new - v)
        lam2 = lam2 + mu * (theta_new.sum() - 1.0)

        step = float(np.max(np.abs(theta_new - theta)))
        dual = mu * float(np.max(np.abs(v - v_old)))
        mu = min(config.rho * mu, config.mu_max)
        theta = theta_new
        viol = _violation(theta, v)
        violations.append(viol)
        objectives.append(qp_objective(qp, theta))
        if viol < config.feas_tol and (dual < config.feas_tol or step < config.stall_tol):
            converged = True
            break

    theta = project_to_simplex(theta)
    return AlmResult(theta, converged, it, np.array(violations), np.array(objectives))
