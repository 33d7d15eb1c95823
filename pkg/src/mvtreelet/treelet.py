"""Single-view treelet transform.

Each level merges the two most correlated active variables with a local
2x2 PCA (a Jacobi rotation). The higher-variance output ("sum") stays
active, the lower-variance output ("difference") is retired.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParameterError
from .linalg import (
    JacobiRotation,
    as_matrix,
    check_symmetric,
    compute_correlation,
    rotate_columns_inplace,
    rotate_symmetric_inplace,
)

__all__ = [
    "JacobiRotation",
    "TreeletBasis",
    "TreeletState",
    "default_levels",
    "find_max_correlation_pair",
    "single_view_rotation",
    "treelet_transform",
]

# |rho| values this close to the maximum count as tied, so that rounding
# noise in the last bits cannot change which pair gets merged.
TIE_TOL = 1e-12


@dataclass
class TreeletState:
    sigma: np.ndarray
    rho: np.ndarray
    active: list
    level: int = 1


@dataclass
class TreeletBasis:
    """Result of a (multi-view) treelet transform.

    Attributes
    ----------
    basis : ndarray, shape (p, p)
        Orthogonal matrix whose columns are the treelet basis vectors.
    rotations : list of JacobiRotation
        One rotation per level, in order of application.
    survivor_order : list of int
        Active indices at termination followed by dropped indices in the
        order they were dropped.
    levels : int
        Number of levels computed.
    """

    basis: np.ndarray
    rotations: list = field(default_factory=list)
    survivor_order: list = field(default_factory=list)
    levels: int = 0

    @property
    def p(self) -> int:
        return self.basis.shape[0]

    def transform(self, sigma) -> np.ndarray:
        """Express a covariance in this basis: ``B^T sigma B``."""
        return self.basis.T @ np.asarray(sigma, dtype=np.float64) @ self.basis


def default_levels(p: int) -> int:
    if p < 2:
        raise ParameterError(f"p must be >= 2, got {p}")
    return p // 2


def _first_near_max(scores: np.ndarray) -> tuple:
    """Index tuple of the first entry (C order) within TIE_TOL of the max."""
    best = scores.max()
    hit = np.flatnonzero(scores.ravel() >= best - TIE_TOL)[0]
    return np.unravel_index(hit, scores.shape)


def find_max_correlation_pair(rho, active) -> tuple:
    """Active pair ``(j, k)``, ``j < k``, with the largest ``|rho[j, k]|``.

    Ties go to the smallest ``j``, then the smallest ``k``.
    """
    act = np.sort(np.asarray(list(active), dtype=int))
    if act.size < 2:
        raise DimensionError("need at least two active indices")
    sub = np.abs(np.asarray(rho)[np.ix_(act, act)])
    scores = np.where(np.triu(np.ones(sub.shape, dtype=bool), 1), sub, -np.inf)
    a, b = _first_near_max(scores)
    return int(act[a]), int(act[b])


def single_view_rotation(sigma, pair, level: int = 0) -> JacobiRotation:
    """Jacobi rotation that zeroes ``sigma[j, k]``.

    The angle is taken in (-pi/4, pi/4].
    """
    j, k = pair
    a = sigma[j, j]
    d = sigma[k, k]
    b = sigma[j, k]
    if b == 0.0:
        return JacobiRotation(j, k, 1.0, 0.0, level)
    # t = tan(theta) is the small root of b t^2 + (a - d) t - b = 0
    with np.errstate(over="ignore"):  # zeta -> inf gives t -> 0, which is right
        zeta = (a - d) / (2.0 * b)
        sign = 1.0 if zeta >= 0.0 else -1.0
        t = sign / (abs(zeta) + np.hypot(1.0, zeta))
    c = 1.0 / np.hypot(1.0, t)
    return JacobiRotation(j, k, float(c), float(t * c), level)


def _drop_index(variances, j, k) -> int:
    vj, vk = variances
    scale = max(abs(vj), abs(vk), 1e-300)
    if abs(vj - vk) <= 1e-12 * scale:
        return max(j, k)
    return j if vj < vk else k


def treelet_transform(sigma0, L=None) -> TreeletBasis:
    """Run ``L`` levels of the treelet transform on a covariance matrix.

    Parameters
    ----------
    sigma0 : array_like, shape (p, p)
        Symmetric covariance (or covariance surrogate).
    L : int, optional
        Number of levels, ``1 <= L <= p - 1``. Defaults to ``p // 2``.
    """
    sigma = as_matrix(sigma0, "sigma0", square=True)
    check_symmetric(sigma, "sigma0")
    sigma = 0.5 * (sigma + sigma.T)
    p = sigma.shape[0]
    if L is None:
        L = default_levels(p)
    if not 1 <= L <= p - 1:
        raise ParameterError(f"L must be in [1, {p - 1}], got {L}")

    state = TreeletState(sigma=sigma, rho=compute_correlation(sigma), active=list(range(p)))
    B = np.eye(p)
    rotations = []
    dropped = []
    for level in range(1, L + 1):
        state.level = level
        j, k = find_max_correlation_pair(state.rho, state.active)
        rot = single_view_rotation(state.sigma, (j, k), level)
        rotate_symmetric_inplace(state.sigma, j, k, rot.c, rot.s)
        rotate_columns_inplace(B, j, k, rot.c, rot.s)
        rotations.append(rot)
        drop = _drop_index((state.sigma[j, j], state.sigma[k, k]), j, k)
        state.active.remove(drop)
        dropped.append(drop)
        state.rho = compute_correlation(state.sigma)

    return TreeletBasis(
        basis=B,
        rotations=rotations,
        survivor_order=list(state.active) + dropped,
        levels=L,
    )
