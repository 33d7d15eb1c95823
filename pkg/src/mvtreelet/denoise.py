"""Denoising by hard-thresholding basis coefficients at an FDR boundary."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .errors import DegenerateError, DimensionError, ParameterError
from .linalg import as_matrix
from .treelet import TreeletBasis


@dataclass
class CoefficientSet:
    """Column ``j`` of ``coeffs`` is the expansion of data column ``X_j``."""

    coeffs: np.ndarray
    basis: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.basis @ self.coeffs


@dataclass
class FdrResult:
    q: float
    p_values: np.ndarray
    threshold: float
    rejected_count: int


def _basis_matrix(basis) -> np.ndarray:
    if isinstance(basis, TreeletBasis):
        return basis.basis
    return as_matrix(basis, "basis", square=True)


def expand(X, basis) -> CoefficientSet:
    X = as_matrix(X, "X")
    B = _basis_matrix(basis)
    if B.shape[0] != X.shape[0]:
        raise DimensionError(f"basis is {B.shape}, data has {X.shape[0]} rows")
    return CoefficientSet(B.T @ X, B)


def coefficient_p_values(coeffs) -> np.ndarray:
    """Two-tailed p-values under a zero-mean Gaussian with the pooled variance.

    Returns an array with the same shape as the coefficients.
    """
    c = coeffs.coeffs if isinstance(coeffs, CoefficientSet) else np.asarray(coeffs, float)
    if c.size < 2:
        raise DegenerateError("need at least two coefficients")
    sd = np.std(c)
    if sd == 0.0:
        raise DegenerateError("all coefficients are equal; null variance is zero")
    return erfc(np.abs(c) / (sd * np.sqrt(2.0)))


def fdr_threshold(p_values, coeffs, q: float) -> FdrResult:
    """Benjamini-Hochberg step-up; the boundary coefficient's magnitude is the threshold.

    The threshold is the smallest ``|c|`` among the rejected coefficients, so
    hard thresholding keeps exactly the rejected set even when p-values tie.
    With no rejections the threshold is ``inf``.
    """
    if not 0.0 < q < 1.0:
        raise ParameterError(f"q must be in (0, 1), got {q}")
    p = np.asarray(p_values, dtype=np.float64).ravel()
    c = np.asarray(coeffs, dtype=np.float64).ravel()
    if p.shape != c.shape:
        raise DimensionError(f"{p.size} p-values for {c.size} coefficients")
    n = p.size
    order = np.argsort(p, kind="stable")
    ok = np.flatnonzero(p[order] <= q * np.arange(1, n + 1) / n)
    if ok.size == 0:
        return FdrResult(q, p, float("inf"), 0)
    m = int(ok[-1]) + 1
    return FdrResult(q, p, float(np.abs(c[order[:m]]).min()), m)


def hard_threshold(coeffs: CoefficientSet, threshold: float) -> CoefficientSet:
    """Zero every coefficient with ``|c| < threshold``."""
    if threshold < 0:
        raise ParameterError(f"threshold must be >= 0, got {threshold}")
    c = coeffs.coeffs
    return CoefficientSet(np.where(np.abs(c) < threshold, 0.0, c), coeffs.basis)


def denoise(X, basis, q: float, full_output: bool = False):
    """Expand, FDR-threshold and reconstruct ``X``.

    With ``full_output`` returns ``(X_d, FdrResult, thresholded CoefficientSet)``.
    """
    cs = expand(X, basis)
    fdr = fdr_threshold(coefficient_p_values(cs), cs.coeffs, q)
    kept = hard_threshold(cs, fdr.threshold)
    Xd = kept.reconstruct()
    if full_output:
        return Xd, fdr, kept
    return Xd


def denoise_error(X_t, X_d) -> float:
    """Squared Frobenius distance."""
    X_t = as_matrix(X_t, "X_t")
    X_d = as_matrix(X_d, "X_d")
    if X_t.shape != X_d.shape:
        raise DimensionError(f"shape mismatch: {X_t.shape} vs {X_d.shape}")
    D = X_t - X_d
    return float(np.sum(D * D))
