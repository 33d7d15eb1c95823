"""Dense matrix primitives used throughout the package.

Everything here is a pure function of its inputs. Matrices are plain
``numpy.ndarray`` objects of dtype float64.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DegenerateError, NonFiniteError

VARIANCE_FLOOR = 1e-12


@dataclass(frozen=True)
class JacobiRotation:
    """Givens rotation acting on the index pair ``(j, k)``.

    The rotation matrix equals the identity except for::

        J[j, j] = c   J[j, k] = -s
        J[k, j] = s   J[k, k] = c
    """

    j: int
    k: int
    c: float
    s: float
    level: int = 0

    def __post_init__(self):
        if self.j == self.k:
            raise DimensionError("rotation pair must have j != k")
        if abs(self.c * self.c + self.s * self.s - 1.0) > 1e-12:
            raise DimensionError(
                f"c**2 + s**2 must be 1 (got {self.c * self.c + self.s * self.s!r})")

    @property
    def is_identity(self) -> bool:
        return self.c == 1.0 and self.s == 0.0

    def as_matrix(self, p: int) -> np.ndarray:
        J = np.eye(p)
        J[self.j, self.j] = self.c
        J[self.j, self.k] = -self.s
        J[self.k, self.j] = self.s
        J[self.k, self.k] = self.c
        return J


def as_matrix(A, name="matrix", square=False) -> np.ndarray:
    """Validate ``A`` as a finite 2-D float array and return a float64 copy."""
    A = np.array(A, dtype=np.float64)
    if A.ndim != 2 or A.size == 0:
        raise DimensionError(f"{name} must be a non-empty 2-D array, got shape {A.shape}")
    if square and A.shape[0] != A.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NonFiniteError(f"{name} contains NaN or Inf")
    return A


def check_symmetric(A, name="matrix", atol=1e-8) -> None:
    scale = max(1.0, float(np.max(np.abs(A))))
    if not np.allclose(A, A.T, rtol=0.0, atol=atol * scale):
        raise DimensionError(f"{name} must be symmetric")


def compute_covariance(X) -> np.ndarray:
    """Sample covariance of the columns of ``X`` (divisor ``n - 1``)."""
    X = as_matrix(X, "X")
    n, p = X.shape
    if n < 2 or p < 2:
        raise DimensionError(f"need at least 2 rows and 2 columns, got {X.shape}")
    Xc = X - X.mean(axis=0)
    S = Xc.T @ Xc / (n - 1)
    return 0.5 * (S + S.T)


def compute_correlation(sigma, variance_floor=VARIANCE_FLOOR) -> np.ndarray:
    """Correlation coefficients from a covariance matrix.

    Works on a single ``(p, p)`` matrix or a stack ``(M, p, p)``. Columns
    whose variance is at or below ``variance_floor`` get zero correlation
    with everything, including themselves.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    var = np.diagonal(sigma, axis1=-2, axis2=-1)
    ok = var > variance_floor
    sd = np.sqrt(np.where(ok, var, 1.0))
    rho = sigma / (sd[..., :, None] * sd[..., None, :])
    mask = ok[..., :, None] & ok[..., None, :]
    rho = np.where(mask, rho, 0.0)
    idx = np.arange(sigma.shape[-1])
    rho[..., idx, idx] = np.where(ok, 1.0, 0.0)
    # rounding can push |rho| a hair past 1
    return np.clip(rho, -1.0, 1.0)


def off_diagonal_norm(A) -> float:
    """Sum of squared off-diagonal entries."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    return float(np.sum(A * A) - np.sum(np.diag(A) ** 2))


def rotate_symmetric_inplace(S: np.ndarray, j: int, k: int, c: float, s: float) -> None:
    """In-place ``S <- J^T S J`` on the trailing two axes (rank-2 update).

    ``S`` may be a single matrix or a stack of matrices; only rows and
    columns ``j`` and ``k`` are touched.
    """
    cj = S[..., :, j].copy()
    ck = S[..., :, k]
    S[..., :, j] = c * cj + s * ck
    S[..., :, k] = c * ck - s * cj
    rj = S[..., j, :].copy()
    rk = S[..., k, :]
    S[..., j, :] = c * rj + s * rk
    S[..., k, :] = c * rk - s * rj
    for t in (j, k):
        sym = 0.5 * (S[..., t, :] + S[..., :, t])
        S[..., t, :] = sym
        S[..., :, t] = sym


def rotate_columns_inplace(B: np.ndarray, j: int, k: int, c: float, s: float) -> None:
    """In-place ``B <- B J``."""
    bj = B[:, j].copy()
    bk = B[:, k]
    B[:, j] = c * bj + s * bk
    B[:, k] = c * bk - s * bj


def apply_rotation_symmetric(sigma, rot: JacobiRotation) -> np.ndarray:
    """Return ``J^T sigma J`` for the Givens rotation ``rot``."""
    S = as_matrix(sigma, "sigma", square=True)
    p = S.shape[0]
    if not (0 <= rot.j < p and 0 <= rot.k < p):
        raise DimensionError(f"rotation indices ({rot.j}, {rot.k}) out of range for p={p}")
    rotate_symmetric_inplace(S, rot.j, rot.k, rot.c, rot.s)
    return S


def orthogonal_procrustes(A, B) -> np.ndarray:
    """Orthogonal ``R`` minimising ``||R A - B||_F``.

    With ``B A^T = U S V^T`` the minimiser is ``R = U V^T``. When the
    cross-product is rank deficient any of the optimal solutions may be
    returned.
    """
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch: {A.shape} vs {B.shape}")
    U, _, Vt = np.linalg.svd(B @ A.T)
    return U @ Vt


def pearson_correlation(A, B) -> float:
    """Pearson correlation between the flattened entries of ``A`` and ``B``."""
    a = np.asarray(A, dtype=np.float64).ravel()
    b = np.asarray(B, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {np.shape(A)} vs {np.shape(B)}")
    if a.size < 2:
        raise DimensionError("need at least 2 entries")
    a = a - a.mean()
    b = b - b.mean()
    na = np.sqrt(a @ a)
    nb = np.sqrt(b @ b)
    if na == 0.0 or nb == 0.0:
        raise DegenerateError("correlation undefined for a constant input")
    return float(np.clip((a @ b) / (na * nb), -1.0, 1.0))
