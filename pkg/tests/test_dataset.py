import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from r2attr.dataset import Dataset, GroupMap, aggregate_groups, correlation_matrix, standardize
from r2attr.errors import DataError


def test_standardize_simple_column():
    ds = Dataset([1.0, 2.0, 4.0], np.array([[1.0], [2.0], [3.0]]), ("a",))
    s = standardize(ds)
    np.testing.assert_allclose(s.Xs[:, 0], [-1.224744871391589, 0.0, 1.224744871391589], atol=1e-12)
    assert s.col_means[1] == pytest.approx(2.0)
    assert s.col_scales[1] == pytest.approx(np.sqrt(2 / 3))


def test_standardize_already_standard():
    col = np.array([-1.224744871391589, 0.0, 1.224744871391589])
    s = standardize(Dataset([0.0, 1.0, 3.0], col[:, None], ("a",)))
    np.testing.assert_allclose(s.Xs[:, 0], col, atol=1e-12)
    assert s.col_scales[1] == pytest.approx(1.0, abs=1e-12)
    assert s.col_means[1] == pytest.approx(0.0, abs=1e-12)


def test_constant_channel_rejected():
    with pytest.raises(DataError, match="constant channel b"):
        standardize(Dataset([1.0, 2.0, 3.0], np.array([[1, 5], [2, 5], [3, 5.0]]), ("a", "b")))


def test_moments_and_roundtrip(four_row):
    s = standardize(four_row)
    full = np.column_stack([s.ys, s.Xs])
    assert np.all(np.abs(full.mean(axis=0)) < 1e-10)
    assert np.all(np.abs((full**2).mean(axis=0) - 1) < 1e-10)
    back = s.unstandardize()
    np.testing.assert_allclose(back.X, four_row.X, atol=1e-12)
    np.testing.assert_allclose(back.y, four_row.y, atol=1e-12)


def test_dataset_validation():
    with pytest.raises(DataError, match="duplicate"):
        Dataset([1.0, 2.0], np.ones((2, 2)), ("a", "a"))
    with pytest.raises(DataError, match="two observations"):
        Dataset([1.0], np.ones((1, 1)), ("a",))
    with pytest.raises(DataError, match="non-finite"):
        Dataset([1.0, 2.0], np.array([[1.0], [np.nan]]), ("a",))


def test_dataset_is_immutable(four_row):
    with pytest.raises(ValueError):
        four_row.X[0, 0] = 9.0


def test_correlation_orthogonal_and_derived(four_row_std):
    ortho = Dataset([1.0, 2.0, 0.0, 3.0], np.array([[1, 1], [1, -1], [-1, 1], [-1, -1.0]]), ("a", "b"))
    assert correlation_matrix(standardize(ortho))[0, 1] == pytest.approx(0.0, abs=1e-15)
    # hand dot product: (1*sqrt2 + 0 + 0 + 1*sqrt2) / 4 = 1/sqrt2
    assert correlation_matrix(four_row_std)[0, 1] == pytest.approx(0.7071067811865476, abs=1e-12)


def test_correlation_identical_columns():
    x = np.array([1.0, 3.0, 2.0, 5.0])
    s = standardize(Dataset([1.0, 0.0, 2.0, 1.0], np.column_stack([x, x]), ("a", "b")))
    assert correlation_matrix(s)[0, 1] == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 40), st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_standardize_idempotent_and_psd(n, p, seed):
    rng = np.random.default_rng(seed)
    ds = Dataset(rng.normal(size=n), rng.normal(size=(n, p)) * rng.uniform(0.1, 10, p) + rng.normal(size=p),
                 tuple(f"c{j}" for j in range(p)))
    s1 = standardize(ds)
    s2 = standardize(Dataset(s1.ys, s1.Xs, ds.channel_names))
    np.testing.assert_allclose(s2.Xs, s1.Xs, atol=1e-12)
    np.testing.assert_allclose(s2.ys, s1.ys, atol=1e-12)
    C = correlation_matrix(s1)
    assert np.allclose(C, C.T)
    assert np.linalg.eigvalsh(C).min() >= -1e-8
    assert np.all(np.abs(C) <= 1)


def test_aggregate_groups_sums():
    ds = Dataset([1.0, 2.0], np.array([[1.0, 2.0], [0.0, 3.0]]), ("A", "B"))
    out = aggregate_groups(ds, GroupMap({"A": "G", "B": "G"}))
    np.testing.assert_array_equal(out.X[:, 0], [3.0, 3.0])
    assert out.channel_names == ("G",)
    np.testing.assert_array_equal(out.y, ds.y)


def test_aggregate_identity_grouping():
    rng = np.random.default_rng(1)
    ds = Dataset(rng.normal(size=5), rng.normal(size=(5, 3)), ("a", "b", "c"))
    out = aggregate_groups(ds, GroupMap({"a": "a", "b": "b", "c": "c"}))
    np.testing.assert_array_equal(out.X, ds.X)


def test_aggregate_unmapped_channel():
    ds = Dataset([1.0, 2.0], np.ones((2, 3)), ("A", "B", "C"))
    with pytest.raises(DataError, match="unmapped channel C"):
        aggregate_groups(ds, GroupMap({"A": "G", "B": "H"}))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 20), st.integers(1, 8), st.integers(1, 4), st.integers(0, 2**31 - 1))
def test_aggregate_preserves_mass(n, p, g, seed):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 50, size=(n, p)).astype(float)
    names = tuple(f"c{j}" for j in range(p))
    gm = GroupMap({c: f"g{rng.integers(g)}" for c in names})
    out = aggregate_groups(Dataset(rng.normal(size=n), X, names), gm)
    assert out.X.sum() == pytest.approx(X.sum())
    assert out.p <= p
