import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from isbpls.errors import DegenerateColumn, NoConvergence
from isbpls.linalg import canonicalize_signs, gram_schmidt_orth, sym_eigen_topR
from tests.oracles import jacobi_eigh


class TestGramSchmidt:
    def test_orthonormal_input_is_fixed_point(self):
        Q, _ = np.linalg.qr(np.random.default_rng(0).normal(size=(6, 3)))
        U = gram_schmidt_orth(Q)
        np.testing.assert_allclose(np.abs(U), np.abs(Q), atol=1e-12)
        np.testing.assert_allclose(U, Q * np.sign(np.sum(U * Q, axis=0)), atol=1e-12)

    def test_two_columns(self):
        U = gram_schmidt_orth(np.array([[1.0, 1.0], [0.0, 1.0]]))
        np.testing.assert_allclose(U, np.eye(2), atol=1e-15)

    def test_against_direct_gram(self):
        rng = np.random.default_rng(1)
        Q = rng.normal(size=(10, 3))
        U = gram_schmidt_orth(Q)
        assert np.max(np.abs(U.T @ U - np.eye(3))) <= 1e-10
        # brute-force re-orthogonalization: each column spans the same flag as QR
        Qr, Rr = np.linalg.qr(Q)
        np.testing.assert_allclose(np.abs(U), np.abs(Qr), atol=1e-12)
        # first column is the normalized first input
        np.testing.assert_allclose(U[:, 0], Q[:, 0] / np.linalg.norm(Q[:, 0]))

    def test_nearly_parallel_columns_stay_orthonormal(self):
        rng = np.random.default_rng(2)
        a = rng.normal(size=20)
        Q = np.stack([a * 1e12, a * 1e12 + rng.normal(size=20)], axis=1)
        U = gram_schmidt_orth(Q)
        assert np.max(np.abs(U.T @ U - np.eye(2))) <= 1e-10

    def test_dependent_column_raises(self):
        Q = np.array([[1.0, 2.0], [1.0, 2.0]])
        with pytest.raises(DegenerateColumn) as info:
            gram_schmidt_orth(Q)
        assert info.value.column == 1

    def test_zero_column_raises(self):
        with pytest.raises(DegenerateColumn):
            gram_schmidt_orth(np.zeros((3, 1)))

    @settings(max_examples=200, deadline=None)
    @given(arrays(np.float64, (8, 3), elements=st.floats(-10, 10)))
    def test_output_orthonormal(self, Q):
        try:
            U = gram_schmidt_orth(Q)
        except DegenerateColumn:
            return
        assert np.max(np.abs(U.T @ U - np.eye(3))) <= 1e-10


class TestSymEigen:
    def test_diagonal(self):
        w, U = sym_eigen_topR(np.diag([3.0, 2.0, 1.0]), 2)
        np.testing.assert_allclose(w, [3, 2])
        np.testing.assert_allclose(U, np.eye(3)[:, :2], atol=1e-12)

    def test_identity_degenerate_spectrum(self):
        H = np.eye(4)
        w, U = sym_eigen_topR(H, 2)
        np.testing.assert_allclose(w, [1, 1])
        assert np.linalg.norm(H @ U - U * w) <= 1e-10
        np.testing.assert_allclose(U.T @ U, np.eye(2), atol=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_jacobi(self, seed):
        rng = np.random.default_rng(seed)
        A = rng.normal(size=(8, 8))
        H = A @ A.T
        w, U = sym_eigen_topR(H, 3)
        w_ref, V = jacobi_eigh(H)
        np.testing.assert_allclose(w, w_ref[:3], rtol=1e-10)
        cos = np.abs(np.sum(U * V[:, :3], axis=0))
        assert np.all(cos >= 1 - 1e-8)

    def test_residual_bound(self):
        rng = np.random.default_rng(7)
        A = rng.normal(size=(12, 5))
        H = A @ A.T
        w, U = sym_eigen_topR(H, 4, tol=1e-10)
        res = np.linalg.norm(H @ U - U * w, axis=0)
        assert np.all(res <= 1e-10 * np.linalg.norm(H))
        assert np.all(np.diff(w) <= 0)

    def test_rank_deficient(self):
        m = np.array([1.0, 2.0, 0.0, -1.0])
        w, U = sym_eigen_topR(np.outer(m, m), 3)
        np.testing.assert_allclose(w, [6.0, 0.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(U.T @ U, np.eye(3), atol=1e-12)

    def test_signs_canonical(self):
        rng = np.random.default_rng(3)
        A = rng.normal(size=(6, 6))
        _, U = sym_eigen_topR(A @ A.T, 3)
        idx = np.argmax(np.abs(U), axis=0)
        assert np.all(U[idx, range(3)] > 0)

    def test_orthogonal_similarity_invariance(self):
        rng = np.random.default_rng(4)
        A = rng.normal(size=(7, 7))
        H = A @ A.T
        O, _ = np.linalg.qr(rng.normal(size=(7, 7)))
        w1, _ = sym_eigen_topR(H, 3)
        w2, _ = sym_eigen_topR(O @ H @ O.T, 3)
        np.testing.assert_allclose(w1, w2, rtol=1e-9)

    def test_no_convergence(self):
        H = np.diag([1.0, 0.999999, 0.5])
        with pytest.raises(NoConvergence) as info:
            sym_eigen_topR(H + 0.3 * np.ones((3, 3)), 1, max_iter=2)
        w, U = info.value.last
        assert U.shape == (3, 1)


def test_canonicalize_vector():
    np.testing.assert_array_equal(canonicalize_signs(np.array([0.1, -0.9])), [-0.1, 0.9])
