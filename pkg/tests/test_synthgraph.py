import itertools

import numpy as np
import pytest

from mvtreelet.errors import DimensionError, ParameterError
from mvtreelet.synthgraph import (
    DEFAULT_INITIATOR,
    KroneckerSpec,
    add_noise,
    box_filter_coarsen,
    connected_components,
    connection_density,
    generate_views,
    kronecker_power,
)


def digits(x, base, n):
    out = []
    for _ in range(n):
        out.append(x % base)
        x //= base
    return out[::-1]


def kron_oracle(A, k):
    n = A.shape[0]
    size = n ** (k + 1)
    out = np.empty((size, size))
    for a in range(size):
        da = digits(a, n, k + 1)
        for b in range(size):
            db = digits(b, n, k + 1)
            v = 1.0
            for x, y in zip(da, db):
                v *= A[x, y]
            out[a, b] = v
    return out


def test_kron_identity():
    np.testing.assert_array_equal(kronecker_power(np.eye(2), 2), np.eye(8))


def test_kron_hand_example():
    expected = [[1, 1, 1, 1], [0, 1, 0, 1], [0, 0, 1, 1], [0, 0, 0, 1]]
    np.testing.assert_array_equal(kronecker_power(np.array([[1.0, 1.0], [0.0, 1.0]]), 1), expected)


def test_kron_index_decomposition_81():
    K = kronecker_power(DEFAULT_INITIATOR, 3)
    assert K.shape == (81, 81)
    assert np.max(np.abs(K - kron_oracle(DEFAULT_INITIATOR, 3))) < 1e-12


def test_kron_size_guard():
    with pytest.raises(DimensionError):
        kronecker_power(np.eye(3), 9)
    with pytest.raises(ParameterError):
        kronecker_power(np.eye(3), 0)


def test_noise_zero_epsilon_exact():
    T = kronecker_power(DEFAULT_INITIATOR, 2)
    assert np.array_equal(add_noise(T, 0.0, 1).noisy, T)


def test_noise_deterministic_and_symmetric():
    T = kronecker_power(DEFAULT_INITIATOR, 2)
    a = add_noise(T, 0.2, 99).noisy
    b = add_noise(T, 0.2, 99).noisy
    assert np.array_equal(a, b)
    assert np.array_equal(a, a.T)
    assert not np.array_equal(a, add_noise(T, 0.2, 100).noisy)


def test_noise_level_statistics():
    T = kronecker_power(DEFAULT_INITIATOR, 3)
    g = add_noise(T, 0.3, 7)
    d = (g.noisy - T)[np.triu_indices(81)]
    assert d.size == 3321
    assert 0.27 <= d.std() <= 0.33


def test_generate_views_noise_free():
    vs = generate_views(KroneckerSpec(noise_level=0.0, seed=3), 1)
    np.testing.assert_array_equal(vs.views[0], kronecker_power(DEFAULT_INITIATOR, 3))


def test_generate_views_deterministic():
    spec = KroneckerSpec(noise_level=0.2, seed=11)
    assert np.array_equal(generate_views(spec, 5).views, generate_views(spec, 5).views)


def test_generate_views_mean_concentrates():
    spec = KroneckerSpec(noise_level=0.1, seed=5)
    vs = generate_views(spec, 100)
    err = np.abs(vs.views.mean(axis=0) - spec.truth())
    assert np.mean(err <= 3 * 0.1 / np.sqrt(100)) >= 0.99


def test_spec_validation():
    with pytest.raises(ParameterError):
        KroneckerSpec(power=0)
    with pytest.raises(ParameterError):
        KroneckerSpec(noise_level=-1.0)
    with pytest.raises(DimensionError):
        KroneckerSpec(initiator=np.array([[1.0, 0.2, 0.0], [0.1, 1.0, 0.0], [0.0, 0.0, 1.0]]))


def test_coarsen_constant():
    np.testing.assert_array_equal(box_filter_coarsen(np.full((9, 9), 2.5)), np.full((3, 3), 2.5))


def test_coarsen_self_similarity():
    A0 = DEFAULT_INITIATOR
    got = box_filter_coarsen(kronecker_power(A0, 3))
    assert np.max(np.abs(got - A0.mean() * kronecker_power(A0, 2))) < 1e-12


def test_coarsen_to_global_mean():
    A = kronecker_power(DEFAULT_INITIATOR, 3)
    C = A
    for _ in range(4):
        C = box_filter_coarsen(C)
    assert C.shape == (1, 1)
    assert C[0, 0] == pytest.approx(A.mean(), abs=1e-14)


def test_coarsen_rejects_bad_size():
    with pytest.raises(DimensionError):
        box_filter_coarsen(np.ones((4, 4)))


def test_density():
    assert connection_density(np.zeros((5, 5))) == 0.0
    assert connection_density(np.ones((5, 5)), 0.5) == 1.0
    A = np.zeros((4, 4))
    for j, k in [(0, 1), (1, 2), (2, 3)]:
        A[j, k] = A[k, j] = 1.0
    assert connection_density(A, 0.5) == 0.5


def test_components():
    assert connected_components(np.zeros((6, 6))) == 6
    assert connected_components(np.ones((6, 6))) == 1
    A = np.zeros((6, 6))
    for block in ([0, 1, 2], [3, 4, 5]):
        for j, k in itertools.product(block, block):
            A[j, k] = 1.0
    assert connected_components(A, 0.5) == 2
