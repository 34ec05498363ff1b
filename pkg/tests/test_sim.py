import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from r2attr.dataset import standardize
from r2attr.engine import AttributionRequest, SplineConfig, attribute
from r2attr.regression import ols_fit
from r2attr.sim import (additive_truth, campaign_fixture, correlation_structure, gen_example,
                        mvn_sample, replicate_seed, replicate_study)

SMALL_SPLINE = SplineConfig(K_grid=(0, 1), folds=3)


def test_ar1_structure():
    C = correlation_structure("ar1", 3, 0.5)
    np.testing.assert_allclose(C, [[1, 0.5, 0.25], [0.5, 1, 0.5], [0.25, 0.5, 1]])


def test_equi_structure():
    C = correlation_structure("equi", 3, 0.8)
    np.testing.assert_allclose(C, [[1, 0.8, 0.8], [0.8, 1, 0.8], [0.8, 0.8, 1]])


@pytest.mark.parametrize("kind,p,r", [("ar1", 3, 1.0), ("equi", 3, -0.6), ("toeplitz", 3, 0.1)])
def test_structure_errors(kind, p, r):
    with pytest.raises(ValueError):
        correlation_structure(kind, p, r)


@given(st.sampled_from(["ar1", "equi"]), st.integers(1, 12), st.floats(-0.05, 0.95))
@settings(max_examples=60, deadline=None)
def test_structure_is_correlation_matrix(kind, p, r):
    C = correlation_structure(kind, p, r)
    np.testing.assert_allclose(C, C.T)
    np.testing.assert_allclose(np.diag(C), 1.0)
    assert np.linalg.eigvalsh(C).min() > 0


def test_mvn_identity_large():
    Z = mvn_sample(100_000, np.eye(4), 0)
    R = np.corrcoef(Z, rowvar=False)
    assert np.max(np.abs(R - np.eye(4))) < 0.02


def test_mvn_reproducible_and_single_row():
    C = correlation_structure("ar1", 5, 0.5)
    np.testing.assert_array_equal(mvn_sample(50, C, 7), mvn_sample(50, C, 7))
    assert mvn_sample(1, C, 1).shape == (1, 5)


def test_mvn_recovers_correlation():
    C = correlation_structure("equi", 5, 0.8)
    R = np.corrcoef(mvn_sample(200_000, C, 3), rowvar=False)
    assert np.max(np.abs(R - C)) < 0.01


def test_gen_example_sizes():
    tr, te = gen_example(1)
    assert (tr.n, tr.p, te) == (100, 5, None)
    tr, te = gen_example(3)
    assert (tr.n, te.n, tr.p) == (1000, 1000, 5)
    with pytest.raises(ValueError):
        gen_example(4)


def test_noise_free_linear_fits_exactly():
    tr, _ = gen_example(1, {"noise_sd": 0.0}, seed=2)
    sds = standardize(tr)
    assert ols_fit(sds.Xs, sds.ys).r2 == pytest.approx(1.0, abs=1e-10)
    np.testing.assert_allclose(tr.y, tr.X @ np.array([3, -4.5, -0.5, 3, -4]), atol=1e-12)


def test_additive_truth_branch():
    X = np.array([[0.0, 1.0, 0.0, -1.0, 0.0], [2.0, np.e, 0.0, 1.0, 1.0]])
    # x1(1-x1) + 2 log(max(x2,1)) + 1-exp(-x3) + 2|x4|^0.4 + x5
    np.testing.assert_allclose(additive_truth(X), [2.0, -2 + 2 + 2 + 1])


def test_replicate_seed_independent_of_count():
    a = replicate_seed(5, 3).generate_state(4)
    b = replicate_seed(5, 3).generate_state(4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, replicate_seed(5, 4).generate_state(4))


def test_replicates_reproducible_bitwise():
    a = replicate_study(1, ("da", "rw"), 2, seed=11, spline=SMALL_SPLINE)
    b = replicate_study(1, ("da", "rw"), 2, seed=11, spline=SMALL_SPLINE)
    for k in a.shares:
        assert np.array_equal(a.shares[k], b.shares[k])


def test_adding_replicates_keeps_earlier_ones():
    a = replicate_study(2, ("rw",), 2, seed=3, spline=SMALL_SPLINE)
    b = replicate_study(2, ("rw",), 4, seed=3, spline=SMALL_SPLINE)
    for k in a.shares:
        assert np.array_equal(a.shares[k], b.shares[k][:2])


def test_efficiency_every_replicate():
    s = replicate_study(1, ("da", "rw"), 3, seed=0, spline=SMALL_SPLINE)
    for k, v in s.phi_sums.items():
        np.testing.assert_allclose(v[:, 0], v[:, 1], atol=1e-8)
        np.testing.assert_allclose(s.shares[k].sum(axis=1), 1.0, atol=1e-10)


def test_single_replicate_sd_is_nan():
    s = replicate_study(1, ("rw",), 1, seed=0, spline=SMALL_SPLINE)
    assert np.all(np.isnan(s.sd("linear", "rw")))
    with pytest.raises(ValueError):
        replicate_study(1, ("rw",), 0)


def test_example3_fit_stats_present():
    s = replicate_study(3, ("rw",), 2, seed=0, spline=SMALL_SPLINE)
    for model in ("linear", "additive"):
        for kind in ("r2", "rmse", "rmse_observed"):
            m, sd = s.stat(kind, model)
            assert np.isfinite(m) and np.isfinite(sd)
    assert s.stat("rmse", "additive")[0] < s.stat("rmse", "linear")[0]
    assert set(s.chosen_K) <= {0, 1}


def test_fixture_shape_and_names():
    fx = campaign_fixture()
    assert (fx.dataset.n, fx.dataset.p) == (10_000, 18)
    assert fx.signal == ("S1", "S2", "D1")
    assert len(fx.negative) == 4
    assert fx.truth_share.sum() == pytest.approx(1.0)
    assert set(fx.group_map.group_names) == {"Publishers", "DSPs", "Paid Search"}


def test_fixture_reproducible():
    a = campaign_fixture(p=6, signal_channels=(1, 2), n=300, seed=9)
    b = campaign_fixture(p=6, signal_channels=(1, 2), n=300, seed=9)
    assert np.array_equal(a.dataset.X, b.dataset.X) and np.array_equal(a.dataset.y, b.dataset.y)


def test_fixture_negative_channel_filtered():
    fx = campaign_fixture(p=18, n=5000, seed=0)
    res = attribute(fx.dataset, AttributionRequest("rw", "linear", hybrid=True))
    names = fx.dataset.channel_names
    for c in fx.negative:
        j = names.index(c)
        assert res.beta_sign[j] < 0
        assert res.share_hybrid[j] == 0.0
    assert res.share_hybrid.sum() == pytest.approx(1.0, abs=1e-10)


def test_fixture_argument_errors():
    with pytest.raises(ValueError):
        campaign_fixture(p=5, signal_channels=(6,))
