"""Multi-view treelet transform and supporting experiments."""
from .denoise import denoise, denoise_error, expand, fdr_threshold, hard_threshold
from .linalg import (
    JacobiRotation,
    apply_rotation_symmetric,
    compute_correlation,
    compute_covariance,
    off_diagonal_norm,
    orthogonal_procrustes,
    pearson_correlation,
)
from .mvtt import ViewSet, joint_rotation, mvtt_transform
from .srm import srm_fit, srm_reconstruct
from .synthgraph import KroneckerSpec, generate_views, kronecker_power
from .treelet import TreeletBasis, default_levels, treelet_transform

__version__ = "0.1.0"
