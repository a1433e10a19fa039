import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from _oracles import dense_dataset, dense_gaussian
from lpdsvm.dataio import SparseVector, from_points
from lpdsvm.kernel import KernelParams, gaussian, kernel_block


def sv(d):
    return SparseVector.from_dict(d)


def test_gaussian_examples():
    a = sv({0: 1.0, 4: -2.5})
    assert gaussian(a, a, KernelParams(3.7)) == 1.0
    assert gaussian(sv({0: 1.0}), sv({0: 2.0}), KernelParams(math.log(2))) == pytest.approx(0.5, rel=1e-15)
    assert gaussian(sv({0: 1.0}), sv({1: 1.0}), KernelParams(0.5)) == pytest.approx(0.3678794411714423, rel=1e-15)


@pytest.mark.parametrize("gamma", [0.0, -1.0, math.inf, math.nan])
def test_invalid_gamma(gamma):
    with pytest.raises(ValueError):
        KernelParams(gamma)


def test_unknown_kind():
    with pytest.raises(ValueError):
        KernelParams(1.0, "polynomial")


def test_block_single_point():
    p = [sv({2: 0.3})]
    assert kernel_block(p, p, KernelParams(1.0)).tolist() == [[1.0]]


def test_block_orthonormal_points():
    pts = [sv({0: 1.0}), sv({3: 1.0}), sv({7: 1.0})]
    K = kernel_block(pts, pts, KernelParams(1.0))
    expected = np.full((3, 3), math.exp(-2.0))
    np.fill_diagonal(expected, 1.0)
    np.testing.assert_allclose(K, expected, rtol=1e-15)


def test_block_matches_scalar_and_dense(rng):
    X = rng.standard_normal((17, 6)) * (rng.random((17, 6)) < 0.5)
    Y = rng.standard_normal((9, 4))
    A, B = dense_dataset(X), dense_dataset(Y)
    params = KernelParams(0.3)
    K = kernel_block(A, B, params, chunk_size=4)
    scalar = np.array([[gaussian(A[i], B[j], params) for j in range(B.n)] for i in range(A.n)])
    np.testing.assert_allclose(K, scalar, rtol=1e-12, atol=0)
    np.testing.assert_allclose(K, dense_gaussian(X, np.pad(Y, ((0, 0), (0, 2))), 0.3), rtol=1e-12)


def test_block_with_cached_norms(rng):
    A = dense_dataset(rng.standard_normal((5, 3)))
    params = KernelParams(1.0)
    norms = A.sq_norms()
    np.testing.assert_array_equal(kernel_block(A, A, params, norms, norms), kernel_block(A, A, params))


@settings(max_examples=40, deadline=None)
@given(
    arrays(np.float64, st.tuples(st.integers(1, 12), st.integers(1, 5)), elements=st.floats(-3, 3)),
    st.floats(0.01, 2.0),
)
def test_block_invariants(X, gamma):
    A = dense_dataset(X)
    K = kernel_block(A, A, KernelParams(gamma))
    assert np.all(K > 0) and np.all(K <= 1.0)
    np.testing.assert_allclose(np.diag(K), 1.0, rtol=0, atol=1e-12)
    np.testing.assert_allclose(K, K.T, rtol=0, atol=1e-12)
    lam = np.linalg.eigvalsh(K)
    assert lam.min() >= -1e-8 * lam.max()


def test_points_of_different_width():
    a = from_points([sv({0: 1.0})])
    b = from_points([sv({0: 1.0, 9: 2.0})])
    assert kernel_block(a, b, KernelParams(1.0))[0, 0] == pytest.approx(math.exp(-4.0), rel=1e-14)
