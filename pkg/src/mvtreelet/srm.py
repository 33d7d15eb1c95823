"""Non-probabilistic shared response model.

Solves ``min sum_i ||X_i - W_i S||_F^2`` subject to ``W_i^T W_i = I`` by
block-coordinate descent: the shared matrix is the mean of the projected
views, each basis is an orthogonal Procrustes solution.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParameterError
from .mvtt import ViewSet


@dataclass
class SrmModel:
    bases: np.ndarray  # (M, p, K)
    shared: np.ndarray  # (K, n)
    K: int
    objective_trace: list = field(default_factory=list)
    n_iter: int = 0

    @property
    def objective(self) -> float:
        return self.objective_trace[-1]


def _objective(X, W, S):
    R = X - W @ S
    per_view = np.sum(R * R, axis=(1, 2))
    return float(per_view.sum()), float(np.sqrt(per_view).sum())


def srm_fit(views, K: int, max_iters: int = 500, tol: float = 1e-8, seed: int = 0) -> SrmModel:
    """Fit the shared response model.

    Parameters
    ----------
    views : ViewSet or array_like, shape (M, p, n)
        Per-view data matrices. Square symmetric views are the common case
        but any equally shaped matrices are accepted.
    K : int
        Number of shared components, ``1 <= K <= p``.
    max_iters, tol
        Stop when the relative decrease of the squared objective drops
        below ``tol``, when the objective reaches round-off level, or after
        ``max_iters`` sweeps.
    seed : int
        Kept for reproducibility records; initialisation is the top-K left
        singular vectors of each view, so the solver itself is deterministic.

    Notes
    -----
    ``objective_trace`` records the squared objective, starting with the
    value at initialisation.
    """
    X = views.views if isinstance(views, ViewSet) else np.asarray(views, dtype=np.float64)
    if X.ndim == 2:
        X = X[None]
    if X.ndim != 3:
        raise DimensionError(f"views must have shape (M, p, n), got {X.shape}")
    M, p, _ = X.shape
    if not 1 <= K <= p:
        raise ParameterError(f"K must be in [1, {p}], got {K}")
    if max_iters < 1 or tol < 0:
        raise ParameterError("max_iters must be >= 1 and tol >= 0")

    # below this the fit is exact up to round-off and further sweeps only add noise
    zero_level = (X.size * np.finfo(np.float64).eps) ** 2 * float(np.sum(X * X))

    W = np.linalg.svd(X)[0][:, :, :K]
    S = np.mean(np.swapaxes(W, 1, 2) @ X, axis=0)
    obj, _ = _objective(X, W, S)
    trace = [obj]
    it = 0
    for it in range(1, max_iters + 1):
        if obj <= zero_level:
            break
        U, _, Vt = np.linalg.svd(X @ S.T, full_matrices=False)
        W = U @ Vt
        S = np.mean(np.swapaxes(W, 1, 2) @ X, axis=0)
        new, _ = _objective(X, W, S)
        trace.append(new)
        done = (obj - new) <= tol * max(obj, 1e-300)
        obj = new
        if done:
            break
    return SrmModel(bases=W, shared=S, K=K, objective_trace=trace, n_iter=it)


def srm_objective(model: SrmModel, views) -> tuple:
    """``(squared, unsquared)`` objective of ``model`` on ``views``."""
    X = views.views if isinstance(views, ViewSet) else np.asarray(views, dtype=np.float64)
    return _objective(X, model.bases, model.shared)


def srm_reconstruct(model: SrmModel, view_index: int) -> np.ndarray:
    if not 0 <= view_index < model.bases.shape[0]:
        raise IndexError(f"view index {view_index} out of range")
    return model.bases[view_index] @ model.shared
