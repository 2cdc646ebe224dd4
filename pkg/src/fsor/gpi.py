"""Generalized power iteration for quadratic problems on the Stiefel manifold.

Solves ``min Tr(W'AW - 2W'B)`` over ``W`` with orthonormal columns by the
fixed-point update ``W <- polar(2(alpha*I - A)W + 2B)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

__all__ = [
    "QpsmProblem",
    "GpiConfig",
    "GpiSolution",
    "choose_alpha",
    "polar_factor",
    "stiefel_objective",
    "random_stiefel",
    "gpi_solve",
]

_DEGENERATE_SV = 1e-12
_ZERO_ALPHA = 1e-12


@dataclass(frozen=True)
class QpsmProblem:
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        b = np.array(self.b, dtype=float)
        if b.ndim == 1:
            b = b[:, None]
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"a must be square, got shape {a.shape}")
        if b.ndim != 2 or b.shape[0] != a.shape[0]:
            raise ValueError(f"b must have {a.shape[0]} rows, got shape {b.shape}")
        if b.shape[1] > a.shape[0]:
            raise ValueError("k cannot exceed d on the Stiefel manifold")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("problem data must be finite")
        a = 0.5 * (a + a.T)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def d(self) -> int:
        return self.a.shape[0]

    @property
    def k(self) -> int:
        return self.b.shape[1]


@dataclass(frozen=True)
class GpiConfig:
    alpha_safety: float = 1.01
    max_iter: int = 500
    tol: float = 1e-8
    seed: int = 0
    n_starts: int = 5

    def __post_init__(self):
        if not self.alpha_safety > 1:
            raise ValueError("alpha_safety must exceed 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.n_starts < 1:
            raise ValueError("n_starts must be positive")


@dataclass
class GpiSolution:
    w: np.ndarray
    objective_trace: np.ndarray
    iterations: int
    converged: bool
    alpha: float


def choose_alpha(a, safety: float = 1.01, min_steps: int = 30,
                 max_steps: int = 1000) -> float:
    """Pick ``alpha`` so that ``alpha*I - a`` is positive definite.

    The top eigenvalue is estimated by power iteration on ``a + g*I``, where
    ``g`` is the Gershgorin row-sum bound, which makes the shifted matrix
    positive semidefinite so the dominant eigenpair is the one we want. The
    estimate is inflated by ``safety`` and checked with a Cholesky
    factorization; if that check fails the Gershgorin bound is used instead.
    """
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise ValueError("a contains non-finite entries")
    d = a.shape[0]
    gersh = float(np.max(np.sum(np.abs(a), axis=1))) if d else 0.0
    if gersh == 0.0:
        # Any positive shift works; a tiny one makes M ~ 2B so the first
        # polar step already lands on the minimizer.
        return _ZERO_ALPHA

    shifted = a + gersh * np.eye(d)
    # Deterministic start with weight on every coordinate.
    v = np.linspace(1.0, 2.0, d)
    v /= np.linalg.norm(v)
    rayleigh = 0.0
    for step in range(max_steps):
        u = shifted @ v
        new_rayleigh = float(v @ u)
        norm = np.linalg.norm(u)
        if norm == 0.0:
            break
        v = u / norm
        done = abs(new_rayleigh - rayleigh) <= 1e-12 * abs(new_rayleigh)
        rayleigh = new_rayleigh
        if step + 1 >= min_steps and done:
            break
    lam = rayleigh - gersh
    margin = 1e-12 * gersh
    alpha = lam + (safety - 1.0) * abs(lam) + margin
    if alpha <= 0.0:
        alpha = max(alpha, margin)

    try:
        linalg.cholesky(alpha * np.eye(d) - a, lower=True, check_finite=False)
    except linalg.LinAlgError:
        alpha = safety * gersh
    return float(alpha)


def _complete_basis(q: np.ndarray, keep: np.ndarray) -> np.ndarray:
    """Replace the columns of ``q`` not flagged in ``keep`` by Gram-Schmidt
    completion over the standard basis, in index order."""
    q = q.copy()
    basis = [q[:, j] for j in range(q.shape[1]) if keep[j]]
    candidates = iter(np.eye(q.shape[0]))
    for j in range(q.shape[1]):
        if keep[j]:
            continue
        for e in candidates:
            r = e.copy()
            for _ in range(2):
                for u in basis:
                    r -= (u @ r) * u
            norm = np.linalg.norm(r)
            if norm > 1e-8:
                q[:, j] = r / norm
                basis.append(q[:, j])
                break
    return q


def polar_factor(m: np.ndarray) -> np.ndarray:
    """Return ``U V'`` from the compact SVD of ``m`` (d x k, k <= d).

    Singular directions with singular value below 1e-12 are rebuilt by a
    deterministic Gram-Schmidt completion so ties are broken reproducibly.
    """
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    keep = s >= _DEGENERATE_SV
    if not np.all(keep):
        u = _complete_basis(u, keep)
        vt = _complete_basis(vt.T, keep).T
    return u @ vt


def stiefel_objective(a, b, w) -> float:
    """``Tr(W'AW - 2W'B)``."""
    return float(np.sum(w * (a @ w)) - 2.0 * np.sum(w * b))


def random_stiefel(d: int, k: int, seed: int = 0) -> np.ndarray:
    """Q factor of a seeded d x k Gaussian matrix, with a sign-fixed diagonal."""
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((d, k)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def _iterate(a, b, w, alpha, config) -> GpiSolution:
    f = stiefel_objective(a, b, w)
    trace = [f]
    converged = False
    it = 0
    while it < config.max_iter:
        it += 1
        m = 2.0 * (alpha * w - a @ w) + 2.0 * b
        w = polar_factor(m)
        f_new = stiefel_objective(a, b, w)
        trace.append(f_new)
        change = abs(f - f_new) / max(abs(f), np.finfo(float).tiny)
        f = f_new
        if change < config.tol:
            converged = True
            break
    return GpiSolution(w, np.array(trace), it, converged, float(alpha))


def gpi_solve(problem: QpsmProblem, config: Optional[GpiConfig] = None,
              w0: Optional[np.ndarray] = None,
              alpha: Optional[float] = None) -> GpiSolution:
    """Minimize ``Tr(W'AW - 2W'B)`` subject to ``W'W = I``.

    Parameters
    ----------
    problem : QpsmProblem
    config : GpiConfig, optional
    w0 : (d, k) ndarray, optional
        Starting point with orthonormal columns. When omitted, the iteration
        is run from ``config.n_starts`` seeded random orthonormal matrices
        (seeds ``seed, seed + 1, ...``) and the lowest final objective is
        kept; a single start can stall in a non-global local minimum.
    alpha : float, optional
        Shift making ``alpha*I - A`` positive definite. Estimated with
        :func:`choose_alpha` when omitted.

    Returns
    -------
    GpiSolution
        ``objective_trace[0]`` is the objective at the starting point; one
        entry is appended per update.
    """
    config = config or GpiConfig()
    a, b = problem.a, problem.b
    d, k = problem.d, problem.k
    if alpha is None:
        alpha = choose_alpha(a, config.alpha_safety)
    if w0 is not None:
        w = np.array(w0, dtype=float).reshape(d, k)
        if np.max(np.abs(w.T @ w - np.eye(k))) >= 1e-6:
            raise ValueError("w0 must have orthonormal columns")
        return _iterate(a, b, w, alpha, config)

    best = None
    for start in range(config.n_starts):
        sol = _iterate(a, b, random_stiefel(d, k, config.seed + start), alpha, config)
        if best is None or sol.objective_trace[-1] < best.objective_trace[-1]:
            best = sol
    return best
