import math

import numpy as np
import pytest

import lrcc


def test_fit_recovers_recipe_clusters():
    data, labels, means = lrcc.gen_recipe(clusters=3, per_cluster=15, d1=6, d2=4, seed=2)
    assert data.shape == (45, 6, 4)
    assert means.shape == (3, 6, 4)
    edges = lrcc.knn_graph(data, k=5, kernel_scale=0.5)
    res = lrcc.fit(data, edges, gamma1=0.5, gamma2=0.1, tol=1e-7)
    assert res["report"]["converged"]
    assert lrcc.ari(res["labels"], labels) == pytest.approx(1.0)
    assert res["x"].shape == data.shape
    assert len(res["ranks"]) == res["centroids"].shape[0]


def test_zero_penalty_returns_data():
    data, _ = lrcc.gen_quarter_spheres(n_per=5, d1=4, d2=3, seed=1)
    res = lrcc.fit(data, lrcc.knn_graph(data, k=3), gamma1=0.0, gamma2=0.0, tol=1e-10)
    np.testing.assert_allclose(res["x"], data, atol=1e-8)


def test_lloyd_and_metrics():
    data, labels = lrcc.gen_unbalanced([20, 20, 20, 5, 5, 5, 5, 5], d1=6, d2=4, noise=0.05, seed=3)
    res = lrcc.lr_lloyd(data, k=8, rank=2, init="spectral", seed=1)
    assert 0.0 <= lrcc.nmi(res["labels"], labels) <= 1.0
    assert lrcc.ari(labels, labels) == 1.0


def test_recovery_report_is_a_dict():
    data, labels, _ = lrcc.gen_recipe(clusters=2, per_cluster=10, d1=4, d2=3, seed=5)
    report = lrcc.recovery_check(data, labels, lrcc.knn_graph(data, k=4), 1.0, 0.1)
    assert report["delta"] > 0
    assert report["gamma1"] == 1.0
    assert "boundary_lines" in report


def test_chi_cdf_two_dof():
    assert lrcc.chi_cdf(1.3, 2) == pytest.approx(-math.expm1(-1.3**2 / 2), rel=1e-12)


def test_bad_shape_raises():
    with pytest.raises(ValueError):
        lrcc.knn_graph(np.zeros((4, 4)), k=2)
