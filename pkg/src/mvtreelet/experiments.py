"""Seeded experiment harness: convergence, stability, rate fits, denoising
comparisons, SRM reconstruction sweeps and the shared-response pipeline.

Every randomised quantity is drawn from a seed derived from the master
seed and the configuration keys of the cell it belongs to, so results do
not depend on execution order or on which other cells are run.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import curve_fit
from scipy.stats import spearmanr

from .denoise import coefficient_p_values, denoise, denoise_error, fdr_threshold
from .errors import DegenerateError, DimensionError, ParameterError
from .linalg import orthogonal_procrustes, pearson_correlation
from .mvtt import ViewSet, mvtt_transform
from .srm import srm_fit, srm_reconstruct
from .synthgraph import KroneckerSpec, generate_views
from .treelet import default_levels, treelet_transform

RATE_FLOOR = 1e-12


def derive_seed(*keys) -> int:
    """64-bit seed from a tuple of integer keys."""
    entropy = [int(k) & 0xFFFFFFFFFFFFFFFF for k in keys]
    return int(np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)[0])


def _float_key(x: float) -> int:
    return int(np.float64(x).view(np.uint64))


def worker_count() -> int:
    env = os.environ.get("MVTREELET_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def parallel_map(fn, items):
    """Ordered map, threaded when more than one worker is allowed."""
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# --------------------------------------------------------------------------
# convergence / stability / rate

@dataclass
class ConvergenceConfig:
    spec: KroneckerSpec = field(default_factory=KroneckerSpec)
    M_values: list = field(default_factory=lambda: [1, 5, 25, 100])
    epsilon_values: list = field(default_factory=lambda: [0.1, 0.2, 0.3, 0.4, 0.5])
    collections: int = 20
    L: int | None = None
    master_seed: int = 0

    def __post_init__(self):
        if self.collections < 2:
            raise ParameterError(f"collections must be >= 2, got {self.collections}")
        if any(e < 0 for e in self.epsilon_values):
            raise ParameterError("noise levels must be >= 0")
        if any(m < 1 for m in self.M_values):
            raise ParameterError("M values must be >= 1")


@dataclass
class ConvergenceRecord:
    epsilon: float
    M: int
    E_M_mean: float
    E_M_std: float
    per_collection_E_M: list


@dataclass
class RateFit:
    epsilon: float
    rate: float
    bias: float
    fit_residual: float
    amplitude: float = 1.0


def compute_E_M(views, truth, L=None, truth_basis=None) -> float:
    """Squared distance between the view average in the joint basis and the
    single-view treelet representation of the true covariance.

    ``truth_basis`` may carry a precomputed ``treelet_transform(truth, L)``.
    """
    if not isinstance(views, ViewSet):
        views = ViewSet(views)
    truth = np.asarray(truth, dtype=np.float64)
    if truth.shape != (views.p, views.p):
        raise DimensionError(f"truth is {truth.shape}, views are {views.p}x{views.p}")
    if L is None:
        L = default_levels(views.p)
    B = mvtt_transform(views, L).basis
    mean_joint = np.mean(B.T @ views.views @ B, axis=0)
    if truth_basis is None:
        truth_basis = treelet_transform(truth, L)
    D = mean_joint - truth_basis.transform(truth)
    return float(np.sum(D * D))


def convergence_experiment(config: ConvergenceConfig) -> list:
    truth = config.spec.truth()
    L = config.L if config.L is not None else default_levels(truth.shape[0])
    truth_basis = treelet_transform(truth, L)

    cells = [(eps, M, c) for eps in config.epsilon_values
             for M in config.M_values for c in range(config.collections)]

    def run_cell(cell):
        eps, M, c = cell
        seed = derive_seed(config.master_seed, _float_key(eps), M, c)
        spec = replace(config.spec, noise_level=eps, seed=seed)
        return compute_E_M(generate_views(spec, M), truth, L, truth_basis)

    values = dict(zip(cells, parallel_map(run_cell, cells)))
    records = []
    for eps in config.epsilon_values:
        for M in config.M_values:
            e = np.array([values[(eps, M, c)] for c in range(config.collections)])
            records.append(ConvergenceRecord(
                epsilon=float(eps), M=int(M),
                E_M_mean=float(e.mean()), E_M_std=float(e.std(ddof=1)),
                per_collection_E_M=e.tolist()))
    return records


def _group_by_epsilon(records):
    groups = {}
    for r in records:
        groups.setdefault(r.epsilon, []).append(r)
    return {eps: sorted(rs, key=lambda r: r.M) for eps, rs in sorted(groups.items())}


def stability_table(records) -> list:
    """Per noise level: the per-M standard deviations of E_M, their mean
    ("stability") and their spread."""
    if not records:
        raise ParameterError("no records")
    rows = []
    for eps, rs in _group_by_epsilon(records).items():
        stds = np.array([r.E_M_std for r in rs])
        rows.append({
            "epsilon": eps,
            "per_M_std": [[r.M, r.E_M_std] for r in rs],
            "stability": float(stds.mean()),
            "std": float(stds.std(ddof=1)) if stds.size > 1 else 0.0,
        })
    return rows


def _exp_model(M, amplitude, rate, bias):
    return amplitude * np.exp(rate * M) + bias


def fit_rate(series, epsilon: float = float("nan")) -> RateFit:
    """Fit ``E_M ~ A exp(r M) + bias`` to ``(M, E_M)`` pairs.

    The starting point is the tail estimate: bias is the mean of the last
    quartile of the series and ``r`` the least-squares slope of
    ``log(E_M - bias)``. The three parameters are then refined by
    nonlinear least squares with ``bias >= 0``; the tail estimate is kept
    if the refinement fails or fits worse.
    """
    pts = sorted((float(m), float(e)) for m, e in series)
    if len(pts) < 4:
        raise ParameterError(f"need at least 4 points, got {len(pts)}")
    M = np.array([m for m, _ in pts])
    E = np.array([e for _, e in pts])
    if np.any(np.diff(M) <= 0):
        raise ParameterError("M values must be strictly increasing")

    tail = max(1, len(E) // 4)
    bias = float(E[-tail:].mean())
    excess = E - bias
    use = excess > RATE_FLOOR
    if use.sum() < 2:
        resid = float(np.sqrt(np.mean((E - bias) ** 2)))
        return RateFit(float(epsilon), 0.0, max(bias, 0.0), resid, 0.0)
    rate, intercept = np.polyfit(M[use], np.log(excess[use]), 1)
    p0 = (float(np.exp(intercept)), float(rate), max(bias, 0.0))
    best = p0
    best_sse = float(np.sum((_exp_model(M, *p0) - E) ** 2))
    try:
        popt, _ = curve_fit(_exp_model, M, E, p0=p0,
                            bounds=([0.0, -np.inf, 0.0], [np.inf, np.inf, np.inf]),
                            maxfev=20000)
        sse = float(np.sum((_exp_model(M, *popt) - E) ** 2))
        if np.all(np.isfinite(popt)) and sse <= best_sse:
            best, best_sse = tuple(float(v) for v in popt), sse
    except (RuntimeError, ValueError):
        pass
    amplitude, rate, bias = best
    return RateFit(float(epsilon), rate, bias, float(np.sqrt(best_sse / len(E))), amplitude)


def rate_fits(records) -> list:
    return [fit_rate([(r.M, r.E_M_mean) for r in rs], eps)
            for eps, rs in _group_by_epsilon(records).items()]


def convergence_trend(records) -> dict:
    """Spearman correlation of (M, E_M_mean) per noise level."""
    out = {}
    for eps, rs in _group_by_epsilon(records).items():
        Ms = [r.M for r in rs]
        Es = [r.E_M_mean for r in rs]
        out[eps] = float(spearmanr(Ms, Es).statistic) if len(set(Es)) > 1 else 0.0
    return out


# --------------------------------------------------------------------------
# denoising

@dataclass
class DenoiseComparison:
    rows: list
    mean_single: float
    mean_multi: float
    mean_difference: float
    multi_wins: int


def single_vs_multi_denoise(spec: KroneckerSpec, M: int = 100, trials: int = 30,
                            q: float = 0.015, L=None) -> DenoiseComparison:
    """Average denoising error with per-view treelet bases versus one joint
    basis, per trial; positive difference means the joint basis wins."""
    if M < 2 or trials < 1:
        raise ParameterError("need M >= 2 and trials >= 1")
    truth = spec.truth()
    L = L if L is not None else default_levels(truth.shape[0])

    def run_trial(t):
        views = generate_views(replace(spec, seed=derive_seed(spec.seed, t)), M)
        joint = mvtt_transform(views, L)
        single, multi = [], []
        for X in views.views:
            own = treelet_transform(X, L)
            single.append(denoise_error(truth, denoise(X, own, q)))
            multi.append(denoise_error(truth, denoise(X, joint, q)))
        s, m = float(np.mean(single)), float(np.mean(multi))
        return {"trial": t, "single": s, "multi": m, "difference": s - m}

    rows = parallel_map(run_trial, range(trials))
    d = np.array([r["difference"] for r in rows])
    return DenoiseComparison(
        rows=rows,
        mean_single=float(np.mean([r["single"] for r in rows])),
        mean_multi=float(np.mean([r["multi"] for r in rows])),
        mean_difference=float(d.mean()),
        multi_wins=int(np.sum(d > 0)),
    )


def srm_reconstruction_sweep(truth, K_values, M: int = 1, max_iters: int = 500,
                             tol: float = 1e-8, return_reconstructions: bool = False):
    """Reconstruction error of the SRM fit on ``M`` copies of ``truth`` for each K."""
    truth = np.asarray(truth, dtype=np.float64)
    p = truth.shape[0]
    if any(K < 1 or K > p for K in K_values):
        raise ParameterError(f"K values must lie in [1, {p}]")
    views = np.repeat(truth[None], M, axis=0)
    norm = float(np.linalg.norm(truth))
    rows, recon = [], {}
    for K in K_values:
        model = srm_fit(views, int(K), max_iters=max_iters, tol=tol)
        R = srm_reconstruct(model, 0)
        err = float(np.linalg.norm(truth - R))
        rows.append({"K": int(K), "error": err,
                     "relative_error": err / norm if norm > 0 else 0.0,
                     "iterations": model.n_iter})
        recon[int(K)] = R
    if return_reconstructions:
        return rows, recon
    return rows


# --------------------------------------------------------------------------
# shared response

METHODS = ("mvtt", "srm", "none")
SPACES = ("feature", "label")
SPACE_NOTE = ("feature space = correlation of group-mean denoised reconstructions; "
              "label space = correlation of group-mean thresholded coefficients "
              "(interpretation of the two spaces is an implementation choice)")


@dataclass
class SharedResponseConfig:
    group_split_seed: int = 0
    partitions: int = 5
    fdr_q: float = 0.01
    space: str = "feature"
    method: str = "mvtt"
    L: int | None = None

    def __post_init__(self):
        if self.partitions < 1:
            raise ParameterError("partitions must be >= 1")
        if self.method not in METHODS:
            raise ParameterError(f"method must be one of {METHODS}")
        if self.space not in SPACES:
            raise ParameterError(f"space must be one of {SPACES}")
        if not 0 < self.fdr_q < 1:
            raise ParameterError("fdr_q must be in (0, 1)")


@dataclass
class SharedResponseResult:
    method: str
    space: str
    rows: list
    mean: float
    std: float
    notes: list


def split_train_test(views: ViewSet):
    """Subject ``s`` trains on view ``s`` and tests on view ``n + s``."""
    n = views.M // 2
    return views.views[:n], views.views[n:2 * n]


def _threshold_coeffs(C, q):
    fdr = fdr_threshold(coefficient_p_values(C), C, q)
    return np.where(np.abs(C) < fdr.threshold, 0.0, C)


def _mvtt_reps(train1, train2, test1, test2, q, L):
    Q1 = mvtt_transform(train1, L).basis
    Q2 = mvtt_transform(train2, L).basis
    # R Q2^T ~ Q1^T, so the registered basis is Q2 R^T
    Q2 = Q2 @ orthogonal_procrustes(Q2.T, Q1.T).T
    reps = []
    for Q, test in ((Q1, test1), (Q2, test2)):
        feats, labels = [], []
        for X in test:
            Xd, _, kept = denoise(X, Q, q, full_output=True)
            feats.append(Xd)
            labels.append(kept.coeffs)
        reps.append((np.mean(feats, axis=0), np.mean(labels, axis=0)))
    return reps


def _srm_reps(train1, train2, test1, test2, q):
    p = train1.shape[1]
    m1 = srm_fit(train1, p)
    m2 = srm_fit(train2, p)
    R = orthogonal_procrustes(m2.shared, m1.shared)
    reps = []
    for model, test, reg in ((m1, test1, None), (m2, test2, R)):
        feats, labels = [], []
        for W, X in zip(model.bases, test):
            C = _threshold_coeffs(W.T @ X, q)
            feats.append(W @ C)
            labels.append(C if reg is None else reg @ C)
        reps.append((np.mean(feats, axis=0), np.mean(labels, axis=0)))
    return reps


def shared_response(views, config: SharedResponseConfig) -> SharedResponseResult:
    """Cross-group correlation of registered, denoised test representations.

    The first half of the views are the subjects' training matrices and the
    second half their test matrices. Each partition splits the subjects at
    random into two groups.
    """
    if not isinstance(views, ViewSet):
        views = ViewSet(views)
    if views.M < 4:
        raise DimensionError(f"need at least 4 views, got {views.M}")
    train, test = split_train_test(views)
    n = train.shape[0]
    L = config.L if config.L is not None else default_levels(views.p)
    notes = [SPACE_NOTE] if config.method != "none" else []

    rows = []
    for part in range(config.partitions):
        perm = np.random.default_rng(derive_seed(config.group_split_seed, part)).permutation(n)
        g1, g2 = np.sort(perm[: n // 2]), np.sort(perm[n // 2:])
        if config.method == "none":
            a, b = test[g1].mean(axis=0), test[g2].mean(axis=0)
        else:
            if config.method == "mvtt":
                reps = _mvtt_reps(train[g1], train[g2], test[g1], test[g2], config.fdr_q, L)
            else:
                reps = _srm_reps(train[g1], train[g2], test[g1], test[g2], config.fdr_q)
            k = 0 if config.space == "feature" else 1
            a, b = reps[0][k], reps[1][k]
        try:
            corr = pearson_correlation(a, b)
        except DegenerateError:
            corr = float("nan")
            notes.append(f"partition {part}: a group representation is constant "
                         "(no coefficient survived thresholding); correlation undefined")
        rows.append({"partition": part, "group1": g1.tolist(), "group2": g2.tolist(),
                     "correlation": corr})
    corr = np.array([r["correlation"] for r in rows])
    return SharedResponseResult(
        method=config.method, space=config.space, rows=rows,
        mean=float(corr.mean()),
        std=float(corr.std(ddof=1)) if corr.size > 1 else 0.0,
        notes=notes,
    )
