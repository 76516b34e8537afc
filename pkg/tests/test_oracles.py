import numpy as np
import pytest

from tests.oracles import exhaustive_gamma, jacobi_eigh


@pytest.mark.parametrize("seed", range(3))
def test_jacobi_reconstructs(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(7, 7))
    A = A @ A.T
    w, V = jacobi_eigh(A)
    np.testing.assert_allclose(V @ np.diag(w) @ V.T, A, atol=1e-10)
    np.testing.assert_allclose(V.T @ V, np.eye(7), atol=1e-12)
    assert np.all(np.diff(w) <= 0)


def test_exhaustive_gamma_small():
    assert exhaustive_gamma([3, 1, 4, 1, 5], 2) == 3
    assert exhaustive_gamma([0.9, -0.2, 0.5], 1) == 0.5
