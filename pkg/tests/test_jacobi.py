import numpy as np
import pytest

from fluofloq.jacobi import jacobi_eigh


def _random_hermitian(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return a + a.conj().T


@pytest.mark.parametrize("n, seed", [(2, 0), (5, 1), (12, 2), (30, 3)])
def test_matches_lapack(n, seed):
    a = _random_hermitian(n, seed)
    w, v = jacobi_eigh(a)
    np.testing.assert_allclose(w, np.linalg.eigvalsh(a), atol=1e-10 * np.abs(a).max())
    np.testing.assert_allclose(a @ v, v * w, atol=1e-10 * np.abs(a).max())
    np.testing.assert_allclose(v.conj().T @ v, np.eye(n), atol=1e-12)


def test_diagonal_input_is_sorted():
    w, v = jacobi_eigh(np.diag([3.0, -1.0, 2.0]))
    np.testing.assert_array_equal(w, [-1.0, 2.0, 3.0])
    np.testing.assert_allclose(np.abs(v), np.eye(3)[:, [1, 2, 0]])


def test_degenerate_diagonal_block():
    w, _ = jacobi_eigh(np.array([[1.0, 1.0j], [-1.0j, 1.0]]))
    np.testing.assert_allclose(w, [0.0, 2.0], atol=1e-14)


def test_rejects_non_hermitian():
    with pytest.raises(ValueError):
        jacobi_eigh(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        jacobi_eigh(np.ones((2, 3)))
