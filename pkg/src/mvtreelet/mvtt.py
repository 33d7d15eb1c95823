"""Multi-view treelet transform.

At every level the pair to merge is the most correlated active pair over
all views, and one shared Givens rotation is applied to every view. The
angle is the closed-form minimiser of the summed off-diagonal norm used
in Jacobi joint diagonalisation.
"""
from __future__ import annotations

from dataclasses import dataclass

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
from .treelet import TreeletBasis, _drop_index, _first_near_max, default_levels

DEGENERATE_R = 1e-14


@dataclass
class ViewSet:
    """``M`` symmetric ``p x p`` matrices stacked as an ``(M, p, p)`` array."""

    views: np.ndarray

    def __post_init__(self):
        V = np.array(self.views, dtype=np.float64)
        if V.ndim == 2:
            V = V[None]
        if V.ndim != 3 or V.shape[0] < 1 or V.shape[1] != V.shape[2] or V.shape[1] < 2:
            raise DimensionError(f"views must have shape (M, p, p), got {V.shape}")
        for i, S in enumerate(V):
            as_matrix(S, f"view {i}", square=True)
            check_symmetric(S, f"view {i}")
        self.views = V

    @property
    def M(self) -> int:
        return self.views.shape[0]

    @property
    def p(self) -> int:
        return self.views.shape[1]

    def __len__(self):
        return self.M

    def __getitem__(self, i):
        return self.views[i]

    def subset(self, idx) -> "ViewSet":
        return ViewSet(self.views[np.asarray(idx, dtype=int)])


@dataclass(frozen=True)
class JointSelection:
    view: int
    pair: tuple
    score: float


def find_max_correlation_triple(rhos, active) -> JointSelection:
    """Maximise ``|rho_i[j, k]|`` over views ``i`` and active pairs ``j < k``.

    Ties go to the smallest view, then ``j``, then ``k``.
    """
    rhos = np.asarray(rhos, dtype=np.float64)
    if rhos.ndim == 2:
        rhos = rhos[None]
    act = np.sort(np.asarray(list(active), dtype=int))
    if act.size < 2:
        raise DimensionError("need at least two active indices")
    sub = np.abs(rhos[:, act[:, None], act[None, :]])
    upper = np.triu(np.ones(sub.shape[1:], dtype=bool), 1)
    scores = np.where(upper[None], sub, -np.inf)
    i, a, b = _first_near_max(scores)
    return JointSelection(int(i), (int(act[a]), int(act[b])), float(scores[i, a, b]))


def _top_eigvec_2x2(g11, g12, g22):
    """Leading eigenpair of a symmetric 2x2 matrix, sign fixed so x >= 0."""
    lam = 0.5 * (g11 + g22) + np.hypot(0.5 * (g11 - g22), g12)
    if g12 == 0.0:
        x, y = (1.0, 0.0) if g11 >= g22 else (0.0, 1.0)
    else:
        phi = 0.5 * np.arctan2(2.0 * g12, g11 - g22)  # in (-pi/2, pi/2)
        x, y = np.cos(phi), np.sin(phi)
    return lam, x, y


def joint_rotation(sigmas, pair, level: int = 0) -> JacobiRotation:
    """Shared rotation on ``pair`` minimising ``sum_i off(J^T sigma_i J)``.

    Uses ``h_i = [s_jj - s_kk, s_jk + s_kj]`` and the leading eigenvector
    ``[x, y]`` of ``G = sum_i h_i h_i^T`` scaled to length
    ``r = sqrt(lambda_max)``; then ``c = sqrt((x + r) / 2r)`` and
    ``s = y / sqrt(2r (x + r))``.
    """
    S = np.asarray(sigmas, dtype=np.float64)
    if S.ndim == 2:
        S = S[None]
    j, k = pair
    h0 = S[:, j, j] - S[:, k, k]
    h1 = S[:, j, k] + S[:, k, j]
    lam, ux, uy = _top_eigvec_2x2(float(h0 @ h0), float(h0 @ h1), float(h1 @ h1))
    r = np.sqrt(max(lam, 0.0))
    if r < DEGENERATE_R:
        return JacobiRotation(j, k, 1.0, 0.0, level)
    x, y = r * ux, r * uy
    c = np.sqrt((x + r) / (2.0 * r))
    s = y / np.sqrt(2.0 * r * (x + r))
    return JacobiRotation(j, k, float(c), float(s), level)


def mvtt_transform(views, L=None) -> TreeletBasis:
    """Consensus treelet basis for a collection of views.

    Parameters
    ----------
    views : ViewSet or array_like, shape (M, p, p)
    L : int, optional
        Number of levels, ``1 <= L <= p - 1``; defaults to ``p // 2``.
    """
    if not isinstance(views, ViewSet):
        views = ViewSet(views)
    S = views.views.copy()
    S = 0.5 * (S + np.swapaxes(S, 1, 2))
    p = views.p
    if L is None:
        L = default_levels(p)
    if not 1 <= L <= p - 1:
        raise ParameterError(f"L must be in [1, {p - 1}], got {L}")

    B = np.eye(p)
    active = list(range(p))
    rotations = []
    dropped = []
    for level in range(1, L + 1):
        sel = find_max_correlation_triple(compute_correlation(S), active)
        j, k = sel.pair
        rot = joint_rotation(S, (j, k), level)
        rotate_symmetric_inplace(S, j, k, rot.c, rot.s)
        rotate_columns_inplace(B, j, k, rot.c, rot.s)
        rotations.append(rot)
        drop = _drop_index((S[:, j, j].sum(), S[:, k, k].sum()), j, k)
        active.remove(drop)
        dropped.append(drop)

    return TreeletBasis(basis=B, rotations=rotations, survivor_order=active + dropped, levels=L)
