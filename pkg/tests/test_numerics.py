import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from spate.errors import InvalidArgumentError
from spate.numerics import (RngStream, minmax_fit_apply, pca_apply, pca_fit, rng_gaussian,
                            standardize_fit_apply)


def test_gaussian_moments():
    z = RngStream(123, (4, 5)).gaussians(100_000)
    assert abs(z.mean()) < 0.02
    assert abs(z.var() - 1.0) < 0.03


def test_stream_determinism_and_independence():
    a = RngStream(7, (1, 2))
    assert np.array_equal(a.gaussians(50), RngStream(7, (1, 2)).gaussians(50))
    assert rng_gaussian(a) == a.gaussians(1)[0]
    assert not np.array_equal(a.gaussians(50), a.child(0).gaussians(50))
    assert not np.array_equal(RngStream(7).child(1).uniforms(10), RngStream(7).child(2).uniforms(10))
    # odd lengths are a prefix of longer draws
    assert np.array_equal(a.gaussians(7), a.gaussians(8)[:7])


def test_stream_independent_of_creation_order():
    first = [RngStream(3).child(i).uniforms(5) for i in range(4)]
    later = [RngStream(3).child(i).uniforms(5) for i in reversed(range(4))][::-1]
    assert all(np.array_equal(x, y) for x, y in zip(first, later))


def test_negative_path_rejected():
    with pytest.raises(InvalidArgumentError):
        RngStream(0, (-1,))


def test_standardize_examples():
    tr, te, stats = standardize_fit_apply(np.array([[2.0, 5.0], [4.0, 5.0]]), np.array([[3.0, 7.0]]))
    assert np.allclose(tr[:, 0], [-1, 1])
    assert np.all(tr[:, 1] == 0)
    assert np.allclose(te, [[0.0, 2.0]])
    X = np.random.default_rng(0).normal(3, 2, (40, 3))
    tr, _, _ = standardize_fit_apply(X, X)
    assert np.all(np.abs(tr.mean(axis=0)) < 1e-12)


def test_minmax_examples():
    tr, te, _ = minmax_fit_apply(np.array([[0.0, 1.0], [10.0, 1.0]]), np.array([[5.0, 3.0], [12.0, 1.0], [-4.0, 0.0]]))
    assert np.allclose(tr, [[0, 0], [1, 0]])
    assert np.allclose(te, [[0.5, 0.0], [1.0, 0.0], [0.0, 0.0]])


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (6, 3), elements=st.floats(-1e3, 1e3)),
       arrays(np.float64, (4, 3), elements=st.floats(-1e6, 1e6)))
def test_minmax_always_in_unit_interval(train, test):
    tr, te, _ = minmax_fit_apply(train, test)
    for out in (tr, te):
        assert np.all((out >= 0) & (out <= 1))


def test_pca_line():
    t = np.linspace(-1, 1, 11)
    X = np.column_stack([t, t])
    m = pca_fit(X, 1)
    assert np.allclose(m.components[:, 0], [1 / np.sqrt(2)] * 2)
    Z = pca_apply(m, X)
    assert np.isclose(Z.var(ddof=1), X.var(axis=0, ddof=1).sum())


def test_pca_full_rank_roundtrip_and_orthonormal():
    X = np.random.default_rng(1).normal(size=(30, 5))
    m = pca_fit(X, 5)
    assert np.allclose(m.components.T @ m.components, np.eye(5), atol=1e-10)
    assert np.allclose(m.inverse_transform(m.transform(X)), X, atol=1e-8)
    cov = np.cov(m.transform(X), rowvar=False)
    assert np.allclose(cov, np.diag(np.diag(cov)), atol=1e-8)
    # sign convention
    pivot = np.argmax(np.abs(m.components), axis=0)
    assert np.all(m.components[pivot, np.arange(5)] > 0)


def test_pca_errors():
    with pytest.raises(InvalidArgumentError):
        pca_fit(np.zeros((5, 2)), 3)
    with pytest.raises(InvalidArgumentError):
        pca_fit(np.zeros((1, 2)), 1)


def test_pca_digits_against_eigen_oracle():
    sk = pytest.importorskip("sklearn.datasets")
    X = sk.load_digits().data
    m = pca_fit(X, 8)
    Z = pca_apply(m, X)
    assert Z.shape == (len(X), 8)
    # independent oracle: singular values of the centred data matrix
    s = np.linalg.svd(X - X.mean(axis=0), compute_uv=False)
    assert np.allclose(m.explained_variance, (s ** 2 / (len(X) - 1))[:8], atol=1e-8)
    assert np.allclose(Z.var(axis=0, ddof=1), m.explained_variance, atol=1e-8)
