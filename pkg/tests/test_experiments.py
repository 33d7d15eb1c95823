import numpy as np
import pytest

from mvtreelet.errors import DimensionError, ParameterError
from mvtreelet.experiments import (
    ConvergenceConfig,
    ConvergenceRecord,
    SharedResponseConfig,
    compute_E_M,
    convergence_experiment,
    convergence_trend,
    derive_seed,
    fit_rate,
    rate_fits,
    shared_response,
    single_vs_multi_denoise,
    srm_reconstruction_sweep,
    stability_table,
)
from mvtreelet.mvtt import ViewSet
from mvtreelet.synthgraph import KroneckerSpec, generate_views


SMALL = KroneckerSpec(power=2)


def test_derive_seed_stable_and_distinct():
    assert derive_seed(0, 1, 2) == derive_seed(0, 1, 2)
    assert len({derive_seed(0, m) for m in range(50)}) == 50


def test_E_M_zero_without_noise():
    truth = SMALL.truth()
    for M in (1, 3):
        assert compute_E_M(np.repeat(truth[None], M, axis=0), truth) < 1e-20


def test_E_M_dimension_check():
    with pytest.raises(DimensionError):
        compute_E_M(np.eye(4)[None], np.eye(5))


def test_convergence_deterministic_and_shaped():
    cfg = ConvergenceConfig(spec=SMALL, M_values=[1, 3], epsilon_values=[0.0, 0.2],
                            collections=3, master_seed=4)
    a = convergence_experiment(cfg)
    b = convergence_experiment(cfg)
    assert [r.per_collection_E_M for r in a] == [r.per_collection_E_M for r in b]
    assert [(r.epsilon, r.M) for r in a] == [(0.0, 1), (0.0, 3), (0.2, 1), (0.2, 3)]
    for r in a[:2]:
        assert r.E_M_mean < 1e-20
    assert a[2].E_M_mean > 0


def test_convergence_cells_independent_of_grid():
    # a cell's draws depend only on its own keys
    base = dict(spec=SMALL, epsilon_values=[0.3], collections=2, master_seed=1)
    one = convergence_experiment(ConvergenceConfig(M_values=[2], **base))
    two = convergence_experiment(ConvergenceConfig(M_values=[1, 2], **base))
    assert one[0].per_collection_E_M == two[1].per_collection_E_M


def test_config_validation():
    with pytest.raises(ParameterError):
        ConvergenceConfig(collections=1)
    with pytest.raises(ParameterError):
        ConvergenceConfig(epsilon_values=[-0.1])
    with pytest.raises(ParameterError):
        ConvergenceConfig(M_values=[0])


def _rec(eps, M, std, mean=1.0):
    return ConvergenceRecord(eps, M, mean, std, [])


def test_stability_by_hand():
    recs = [_rec(0.1, 1, 2.0), _rec(0.1, 5, 4.0), _rec(0.1, 25, 6.0), _rec(0.2, 1, 1.0), _rec(0.2, 5, 1.0)]
    rows = stability_table(recs)
    assert rows[0]["epsilon"] == 0.1
    assert rows[0]["stability"] == pytest.approx(4.0)
    assert rows[0]["std"] == pytest.approx(2.0)  # sample std of 2, 4, 6
    assert rows[0]["per_M_std"] == [[1, 2.0], [5, 4.0], [25, 6.0]]
    assert rows[1]["stability"] == 1.0 and rows[1]["std"] == 0.0


def test_fit_rate_recovers_exponential():
    M = np.arange(1, 41)
    fit = fit_rate(list(zip(M, np.exp(-0.2 * M) + 0.05)), 0.3)
    assert fit.rate == pytest.approx(-0.2, abs=1e-3)
    assert fit.bias == pytest.approx(0.05, abs=1e-3)
    assert fit.amplitude == pytest.approx(1.0, abs=1e-2)
    assert fit.epsilon == 0.3


def test_fit_rate_constant_series():
    fit = fit_rate([(m, 2.0) for m in (1, 2, 3, 4, 5)])
    assert fit.rate == 0.0 and fit.bias == 2.0 and fit.fit_residual == 0.0


def test_fit_rate_validation():
    with pytest.raises(ParameterError):
        fit_rate([(1, 1.0), (2, 0.5), (3, 0.2)])
    with pytest.raises(ParameterError):
        fit_rate([(1, 1.0), (1, 0.5), (3, 0.2), (4, 0.1)])


def test_rate_fits_and_trend():
    recs = [ConvergenceRecord(e, M, e * np.exp(-0.5 * M) + 1, 0.0, []) for e in (1.0, 2.0)
            for M in (1, 2, 4, 8, 16)]
    fits = rate_fits(recs)
    assert [f.epsilon for f in fits] == [1.0, 2.0]
    for f in fits:
        assert f.rate == pytest.approx(-0.5, abs=1e-3)
    trend = convergence_trend(recs)
    assert list(trend) == [1.0, 2.0]
    assert all(v == pytest.approx(-1.0) for v in trend.values())


def test_single_vs_multi_small():
    res = single_vs_multi_denoise(KroneckerSpec(power=2, noise_level=0.3, seed=2), M=4, trials=2, q=0.05)
    assert len(res.rows) == 2
    for r in res.rows:
        assert r["single"] >= 0 and r["multi"] >= 0
        assert r["difference"] == pytest.approx(r["single"] - r["multi"])
    assert 0 <= res.multi_wins <= 2
    again = single_vs_multi_denoise(KroneckerSpec(power=2, noise_level=0.3, seed=2), M=4, trials=2, q=0.05)
    assert again.rows == res.rows


def test_srm_sweep_monotone_and_exact_at_full_rank():
    truth = SMALL.truth()
    rows = srm_reconstruction_sweep(truth, [1, 3, 9, 18, 27])
    errs = [r["relative_error"] for r in rows]
    assert all(a >= b - 1e-10 for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-10
    with pytest.raises(ParameterError):
        srm_reconstruction_sweep(truth, [0])


def test_shared_response_identical_views():
    truth = SMALL.truth()
    views = ViewSet(np.repeat(truth[None], 8, axis=0))
    for method in ("mvtt", "srm", "none"):
        res = shared_response(views, SharedResponseConfig(method=method, partitions=2, fdr_q=0.2))
        for r in res.rows:
            assert r["correlation"] == pytest.approx(1.0, abs=1e-9)
            assert sorted(r["group1"] + r["group2"]) == [0, 1, 2, 3]


def test_shared_response_baseline_matches_hand_computation():
    views = generate_views(KroneckerSpec(power=2, noise_level=0.5, seed=9), 8)
    res = shared_response(views, SharedResponseConfig(method="none", partitions=3))
    test = views.views[4:]
    for r in res.rows:
        a = test[r["group1"]].mean(axis=0).ravel()
        b = test[r["group2"]].mean(axis=0).ravel()
        assert r["correlation"] == pytest.approx(np.corrcoef(a, b)[0, 1], abs=1e-12)


def test_shared_response_validation():
    with pytest.raises(ParameterError):
        SharedResponseConfig(method="pca")
    with pytest.raises(ParameterError):
        SharedResponseConfig(space="both")
    with pytest.raises(DimensionError):
        shared_response(np.repeat(np.eye(3)[None], 2, axis=0), SharedResponseConfig())
