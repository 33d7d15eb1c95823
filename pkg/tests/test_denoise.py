import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from mvtreelet.denoise import (
    CoefficientSet,
    coefficient_p_values,
    denoise,
    denoise_error,
    expand,
    fdr_threshold,
    hard_threshold,
)
from mvtreelet.errors import DegenerateError, DimensionError, ParameterError
from mvtreelet.treelet import treelet_transform

from .conftest import random_spd

# 2 * (1 - Phi(1)) from standard normal tables
P_ONE_SIGMA = 0.31731050786291415


def test_expand_identity(rng):
    X = rng.standard_normal((5, 5))
    np.testing.assert_array_equal(expand(X, np.eye(5)).coeffs, X)


def test_expand_basis_column(rng):
    tb = treelet_transform(random_spd(rng, 6), 3)
    cs = expand(tb.basis[:, [3]], tb)
    expected = np.zeros((6, 1))
    expected[3] = 1.0
    np.testing.assert_allclose(cs.coeffs, expected, atol=1e-12)


def test_expand_round_trip(rng):
    tb = treelet_transform(random_spd(rng, 10), 5)
    X = rng.standard_normal((10, 10))
    cs = expand(X, tb)
    np.testing.assert_allclose(tb.basis.T @ X, cs.coeffs, atol=1e-10)
    assert np.max(np.abs(hard_threshold(cs, 0.0).reconstruct() - X)) < 1e-10


def test_expand_dimension_error():
    with pytest.raises(DimensionError):
        expand(np.ones((3, 3)), np.eye(4))


def test_p_values_examples():
    # population std of this vector is exactly 1
    c = np.array([1.0, -1.0, 1.0, -1.0])
    np.testing.assert_allclose(coefficient_p_values(c), P_ONE_SIGMA, atol=1e-12)
    p = coefficient_p_values(np.array([0.0, 1.0, -1.0, 2.0, -2.0]))
    assert p[0] == 1.0
    assert np.all((0 <= p) & (p <= 1))


def test_p_values_degenerate():
    with pytest.raises(DegenerateError):
        coefficient_p_values(np.full(4, 2.0))


@given(arrays(np.float64, 20, elements=st.floats(-100, 100, allow_nan=False)))
def test_p_values_monotone_in_magnitude(c):
    if np.std(c) == 0:
        return
    p = coefficient_p_values(c)
    order = np.argsort(np.abs(c))
    assert np.all(np.diff(p[order]) <= 0)


def test_bh_hand_example():
    c = np.array([5.0, 1.0, 0.2])
    r = fdr_threshold([0.001, 0.2, 0.8], c, 0.05)
    assert r.rejected_count == 1
    assert r.threshold == 5.0


def test_bh_no_rejection():
    r = fdr_threshold(np.ones(4), np.zeros(4), 0.3)
    assert r.rejected_count == 0 and r.threshold == np.inf


def test_bh_all_rejected():
    c = np.array([3.0, -0.5, 2.0])
    r = fdr_threshold(np.full(3, 1e-9), c, 0.05)
    assert r.rejected_count == 3 and r.threshold == 0.5
    assert np.count_nonzero(hard_threshold(CoefficientSet(c[:, None], np.eye(3)), r.threshold).coeffs) == 3


def test_bh_bad_q():
    for q in (0.0, 1.0, -0.1):
        with pytest.raises(ParameterError):
            fdr_threshold([0.1], [1.0], q)


@given(arrays(np.float64, 30, elements=st.floats(0, 1)), st.floats(0.001, 0.5), st.floats(0.001, 0.5))
def test_bh_monotone_in_q(p, q1, q2):
    lo, hi = sorted((q1, q2))
    c = np.arange(30.0)
    assert fdr_threshold(p, c, lo).rejected_count <= fdr_threshold(p, c, hi).rejected_count


def test_hard_threshold_examples():
    cs = CoefficientSet(np.array([[3.0], [-1.0], [0.5]]), np.eye(3))
    np.testing.assert_array_equal(hard_threshold(cs, 1.0).coeffs.ravel(), [3.0, -1.0, 0.0])
    np.testing.assert_array_equal(hard_threshold(cs, 0.0).coeffs, cs.coeffs)
    assert np.all(hard_threshold(cs, np.inf).coeffs == 0)


@settings(max_examples=50)
@given(arrays(np.float64, (4, 4), elements=st.floats(-5, 5)), st.floats(0, 5))
def test_hard_threshold_idempotent(c, t):
    cs = CoefficientSet(c, np.eye(4))
    once = hard_threshold(cs, t)
    np.testing.assert_array_equal(hard_threshold(once, t).coeffs, once.coeffs)


def test_denoise_zero_input_degenerate():
    with pytest.raises(DegenerateError):
        denoise(np.zeros((4, 4)), np.eye(4), 0.05)


def test_denoise_no_rejection_gives_zero():
    # Gaussian-looking coefficients with no outliers: nothing passes at small q
    X = np.random.default_rng(0).standard_normal((20, 20)) * 1e-3
    Xd, fdr, _ = denoise(X, np.eye(20), 0.001, full_output=True)
    assert fdr.threshold == np.inf
    assert np.all(Xd == 0)


def test_denoise_keeps_outliers():
    X = np.zeros((10, 10)) + np.random.default_rng(1).standard_normal((10, 10)) * 0.01
    X[2, 3] = X[7, 1] = 5.0
    Xd = denoise(X, np.eye(10), 0.05)
    assert Xd[2, 3] == 5.0 and Xd[7, 1] == 5.0
    assert np.count_nonzero(Xd) == 2


def test_denoise_error_examples():
    A = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert denoise_error(A, A) == 0.0
    E = np.array([[2.0, 0.0], [0.0, 0.0]])
    assert denoise_error(A, A + E) == 4.0
    assert denoise_error(A, np.array([[0.0, 2.0], [1.0, 5.0]])) == 1.0 + 4.0 + 1.0
    with pytest.raises(DimensionError):
        denoise_error(A, np.eye(3))
