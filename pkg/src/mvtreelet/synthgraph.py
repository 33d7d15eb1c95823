"""Kronecker graphs with additive Gaussian edge noise, plus graph summaries."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components as _cc

from .errors import DimensionError, ParameterError
from .linalg import as_matrix, check_symmetric
from .mvtt import ViewSet

DEFAULT_INITIATOR = np.array([
    [0.9, 0.5, 0.1],
    [0.5, 0.9, 0.5],
    [0.1, 0.5, 0.9],
])
MAX_ROWS = 10_000


@dataclass
class KroneckerSpec:
    initiator: np.ndarray = field(default_factory=lambda: DEFAULT_INITIATOR.copy())
    power: int = 3
    noise_level: float = 0.0
    seed: int = 0

    def __post_init__(self):
        self.initiator = as_matrix(self.initiator, "initiator", square=True)
        check_symmetric(self.initiator, "initiator", atol=0.0)
        if self.power < 1:
            raise ParameterError(f"power must be >= 1, got {self.power}")
        if self.noise_level < 0:
            raise ParameterError(f"noise level must be >= 0, got {self.noise_level}")

    def truth(self) -> np.ndarray:
        return kronecker_power(self.initiator, self.power)


@dataclass
class NoisyGraph:
    truth: np.ndarray
    noisy: np.ndarray
    epsilon: float


def kronecker_power(A, k: int) -> np.ndarray:
    """``A`` Kronecker-multiplied with itself ``k`` times (``k + 1`` factors)."""
    A = as_matrix(A, "A")
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    n = A.shape[0] ** (k + 1)
    if n > MAX_ROWS:
        raise DimensionError(f"result would have {n} rows (limit {MAX_ROWS})")
    out = A
    for _ in range(k):
        out = np.kron(out, A)
    return out


def add_noise(truth, epsilon: float, seed) -> NoisyGraph:
    """Add ``epsilon * N(0, 1)`` to every edge weight, keeping symmetry.

    Draws are taken on the upper triangle (diagonal included) and mirrored.
    ``seed`` is anything ``numpy.random.default_rng`` accepts.
    """
    truth = as_matrix(truth, "truth", square=True)
    check_symmetric(truth, "truth", atol=0.0)
    if epsilon < 0:
        raise ParameterError(f"epsilon must be >= 0, got {epsilon}")
    if epsilon == 0:
        return NoisyGraph(truth, truth.copy(), 0.0)
    rng = np.random.default_rng(seed)
    g = np.triu(rng.standard_normal(truth.shape))
    g = g + np.triu(g, 1).T
    return NoisyGraph(truth, truth + epsilon * g, float(epsilon))


def generate_views(spec: KroneckerSpec, M: int) -> ViewSet:
    """``M`` independently noised copies of the Kronecker graph described by ``spec``.

    View ``i`` draws its noise from the seed sequence ``[spec.seed, i]``.
    """
    if M < 1:
        raise ParameterError(f"M must be >= 1, got {M}")
    truth = spec.truth()
    return ViewSet(np.stack([
        add_noise(truth, spec.noise_level, [spec.seed, i]).noisy for i in range(M)
    ]))


def box_filter_coarsen(A) -> np.ndarray:
    """Replace each non-overlapping 3x3 block by its mean."""
    A = as_matrix(A, "A")
    n, m = A.shape
    if n % 3 or m % 3:
        raise DimensionError(f"dimensions must be divisible by 3, got {A.shape}")
    return A.reshape(n // 3, 3, m // 3, 3).mean(axis=(1, 3))


def connection_density(A, edge_threshold: float = 0.0) -> float:
    """Fraction of off-diagonal upper-triangle entries with ``|a| > threshold``."""
    A = as_matrix(A, "A", square=True)
    iu = np.triu_indices(A.shape[0], 1)
    if iu[0].size == 0:
        return 0.0
    return float(np.mean(np.abs(A[iu]) > edge_threshold))


def connected_components(A, edge_threshold: float = 0.0) -> int:
    A = as_matrix(A, "A", square=True)
    adj = np.abs(A) > edge_threshold
    np.fill_diagonal(adj, False)
    n, _ = _cc(adj, directed=False)
    return int(n)
