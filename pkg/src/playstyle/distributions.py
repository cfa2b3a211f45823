"""Per-state action distributions and the distances between them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EstimationError, ShapeError

COV_RIDGE = 1e-6
KL_EPS = 1e-8
SYMMETRY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class CategoricalDist:
    probs: np.ndarray


@dataclass(frozen=True, eq=False)
class GaussianDist:
    mean: np.ndarray
    cov: np.ndarray

    @property
    def dim(self):
        return len(self.mean)


def fit_categorical(actions, n_actions: int) -> CategoricalDist:
    actions = np.asarray(actions, dtype=np.int64).ravel()
    if actions.size == 0:
        raise EstimationError("cannot fit a categorical distribution to no actions")
    if actions.min() < 0 or actions.max() >= n_actions:
        raise ShapeError(f"action index outside [0, {n_actions})")
    counts = np.bincount(actions, minlength=n_actions)
    return CategoricalDist(counts / actions.size)


def fit_gaussian(actions, ridge: float = COV_RIDGE) -> GaussianDist:
    """Sample mean and maximum-likelihood covariance plus ``ridge * I``."""
    try:
        x = np.asarray(actions, dtype=np.float64)
    except ValueError as exc:
        raise ShapeError("action vectors have inconsistent dimensions") from exc
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ShapeError(f"expected a (n, dim) array of actions, got shape {x.shape}")
    if len(x) == 0:
        raise EstimationError("cannot fit a Gaussian to no actions")
    mean = x.mean(axis=0)
    centred = x - mean
    cov = centred.T @ centred / len(x)
    cov = 0.5 * (cov + cov.T) + ridge * np.eye(x.shape[1])
    return GaussianDist(mean, cov)


def _pair(p, q):
    p = p.probs if isinstance(p, CategoricalDist) else np.asarray(p, dtype=np.float64)
    q = q.probs if isinstance(q, CategoricalDist) else np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ShapeError(f"distribution lengths differ: {p.shape} vs {q.shape}")
    return p, q


def w2_categorical(p, q) -> float:
    """Euclidean distance between the two probability vectors."""
    p, q = _pair(p, q)
    return float(np.sqrt(np.sum((p - q) ** 2)))


def w1_categorical(p, q) -> float:
    p, q = _pair(p, q)
    return float(np.sum(np.abs(p - q)))


def _smooth(p, eps):
    return (p + eps) / (1.0 + p.size * eps)


def kl_categorical(p, q, eps: float = KL_EPS) -> float:
    """KL(p || q) after additive smoothing of both vectors."""
    p, q = _pair(p, q)
    ps, qs = _smooth(p, eps), _smooth(q, eps)
    return float(max(np.sum(ps * np.log(ps / qs)), 0.0))


def mkl_categorical(p, q, eps: float = KL_EPS) -> float:
    return 0.5 * (kl_categorical(p, q, eps) + kl_categorical(q, p, eps))


def psd_sqrt(m) -> np.ndarray:
    """Symmetric square root via eigendecomposition, negative eigenvalues clamped to zero."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if np.max(np.abs(m - m.T), initial=0.0) > SYMMETRY_TOL * scale:
        raise ShapeError("matrix is not symmetric")
    vals, vecs = np.linalg.eigh(0.5 * (m + m.T))
    root = (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T
    return 0.5 * (root + root.T)


def w2_gaussian(g1: GaussianDist, g2: GaussianDist, squared_mean: bool = False) -> float:
    """Mean-distance term plus the covariance trace term.

    By default the mean term is the plain Euclidean norm ``||m1 - m2||``;
    ``squared_mean=True`` gives the usual Frechet form ``||m1 - m2||^2``.
    """
    if g1.dim != g2.dim:
        raise ShapeError(f"Gaussian dimensions differ: {g1.dim} vs {g2.dim}")
    diff = g1.mean - g2.mean
    mean_term = float(diff @ diff) if squared_mean else float(np.sqrt(diff @ diff))
    root2 = psd_sqrt(g2.cov)
    cross = psd_sqrt(root2 @ g1.cov @ root2)
    trace_term = float(np.trace(g1.cov) + np.trace(g2.cov) - 2.0 * np.trace(cross))
    return mean_term + max(trace_term, 0.0)


DISTANCES = {
    "w2": w2_categorical,
    "w1": w1_categorical,
    "kl": kl_categorical,
    "mkl": mkl_categorical,
}
