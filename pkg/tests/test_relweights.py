import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from r2attr.dataset import Dataset, correlation_matrix, standardize
from r2attr.dominance import dominance_analysis
from r2attr.errors import DataError, RankDeficiencyError
from r2attr.regression import ols_fit
from r2attr.relweights import orthogonal_approximation, rw_attribution

from .conftest import orthogonal_dataset, random_dataset


def _oracle(sds):
    """Correlation-matrix route: Lambda = R^(1/2) by eigh, beta* = Lambda^-1 r_xy."""
    R = correlation_matrix(sds)
    w, V = np.linalg.eigh(R)
    Lam = (V * np.sqrt(w)) @ V.T
    rxy = sds.Xs.T @ sds.ys / sds.n
    b = np.linalg.solve(Lam, rxy)
    return Lam, b, (Lam**2) @ (b**2)


def test_lambda_derived(four_row_std):
    r = 1 / np.sqrt(2)
    a = (np.sqrt(1 + r) + np.sqrt(1 - r)) / 2
    b = (np.sqrt(1 + r) - np.sqrt(1 - r)) / 2
    dec = orthogonal_approximation(four_row_std)
    np.testing.assert_allclose(dec.Lambda, [[a, b], [b, a]], atol=1e-12)
    np.testing.assert_allclose(dec.Lambda, [[0.92388, 0.38268], [0.38268, 0.92388]], atol=1e-5)
    np.testing.assert_allclose(four_row_std.Xs, dec.Z @ dec.Lambda, atol=1e-8)


def test_rw_derived(four_row_std):
    dec = rw_attribution(four_row_std)
    Lam, b, phi = _oracle(four_row_std)
    np.testing.assert_allclose(dec.beta_star, b, atol=1e-12)
    # second entry evaluates to 0.655202; the rounded hand value 0.65517 is within 5e-5
    np.testing.assert_allclose(dec.beta_star, [0.75545, 0.65517], atol=5e-5)
    np.testing.assert_allclose(dec.phi, [0.55, 0.45], atol=1e-3)
    np.testing.assert_allclose(dec.phi, phi, atol=1e-12)
    assert dec.phi.sum() == pytest.approx(1.0, abs=1e-12)


def test_orthogonal_design_gives_squared_coefficients():
    s = standardize(orthogonal_dataset(16, 4, seed=3))
    dec = rw_attribution(s, materialize=True)
    beta = ols_fit(s.Xs, s.ys).coefficients
    rho = s.Xs.T @ s.ys / s.n
    np.testing.assert_allclose(dec.phi, beta**2, atol=1e-12)
    np.testing.assert_allclose(dec.phi, rho**2, atol=1e-12)
    np.testing.assert_allclose(dec.Lambda, np.eye(4), atol=1e-12)
    np.testing.assert_allclose(dec.Z, s.Xs, atol=1e-12)


def test_single_column():
    rng = np.random.default_rng(1)
    x = rng.normal(size=30)
    s = standardize(Dataset(x + rng.normal(size=30), x[:, None], ("a",)))
    dec = rw_attribution(s, materialize=True)
    assert dec.Lambda.shape == (1, 1) and dec.Lambda[0, 0] == pytest.approx(1.0)
    np.testing.assert_allclose(dec.Z[:, 0], s.Xs[:, 0], atol=1e-12)
    assert dec.phi[0] == pytest.approx(ols_fit(s.Xs, s.ys).r2)


def test_rank_deficient_rejected():
    rng = np.random.default_rng(2)
    x, z = rng.normal(size=(2, 40))
    s = standardize(Dataset(x + z + rng.normal(size=40), np.column_stack([x, z, x + z]), ("a", "b", "c")))
    with pytest.raises(RankDeficiencyError) as err:
        rw_attribution(s)
    assert set(err.value.dependent) == {"a", "b", "c"}


def test_fewer_rows_than_columns_rejected():
    rng = np.random.default_rng(3)
    s = standardize(Dataset(rng.normal(size=3), rng.normal(size=(3, 5)), tuple("abcde")))
    with pytest.raises(DataError):
        rw_attribution(s)


def test_z_orthogonal_and_closest():
    rng = np.random.default_rng(4)
    s = standardize(random_dataset(rng, 100, 5, corr=0.6))
    dec = orthogonal_approximation(s)
    G = dec.Z.T @ dec.Z
    assert np.all(np.abs(G - np.diag(np.diag(G))) < 1e-8 * s.n)
    best = np.linalg.norm(s.Xs - dec.Z)
    for _ in range(20):
        Qr, _ = np.linalg.qr(rng.normal(size=(100, 5)))
        assert np.linalg.norm(s.Xs - Qr * np.sqrt(100)) >= best - 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(10, 150), st.integers(1, 7), st.integers(0, 2**31 - 1))
def test_rw_properties(n, p, seed):
    rng = np.random.default_rng(seed)
    ds = random_dataset(rng, n, p, corr=rng.uniform(-0.1, 0.8))
    s = standardize(ds)
    dec = rw_attribution(s)
    assert abs(dec.phi.sum() - ols_fit(s.Xs, s.ys).r2) < 1e-8
    assert np.all(dec.phi >= 0)
    np.testing.assert_allclose(dec.phi, _oracle(s)[2], atol=1e-9)
    perm = rng.permutation(p)
    sp = standardize(Dataset(ds.y, ds.X[:, perm], tuple(ds.channel_names[j] for j in perm)))
    np.testing.assert_allclose(rw_attribution(sp).phi, dec.phi[perm], atol=1e-10)
    sc = standardize(Dataset(ds.y, ds.X * rng.uniform(0.1, 10, p) + rng.normal(size=p), ds.channel_names))
    np.testing.assert_allclose(rw_attribution(sc).phi, dec.phi, atol=1e-9)


def test_rw_close_to_da_on_moderate_correlation():
    rng = np.random.default_rng(5)
    s = standardize(random_dataset(rng, 500, 5, corr=0.3))
    a = rw_attribution(s).phi
    b = dominance_analysis(s).phi
    assert np.max(np.abs(a / a.sum() - b / b.sum())) <= 0.05
