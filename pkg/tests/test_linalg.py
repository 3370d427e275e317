import numpy as np
import pytest

from assetflow.errors import NoConvergence
from assetflow.linalg import balance, eigenvalues, hessenberg, hessenberg_eigenvalues, max_real_part


def test_diagonal():
    lam = eigenvalues(np.diag([-1.0, -2.0, -3.0]))
    np.testing.assert_array_equal(lam, [-1, -2, -3])


def test_rotation():
    lam = eigenvalues(np.array([[0.0, -1.0], [1.0, 0.0]]))
    np.testing.assert_allclose(lam, [1j, -1j], atol=1e-15)


def test_triple_root_companion():
    # (l + 1)^3: a defective triple root, perturbed at order eps^(1/3)
    comp = np.array([[-3.0, -3.0, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    lam = eigenvalues(comp)
    assert abs(lam.mean() + 1) < 1e-12
    assert np.max(np.abs(lam + 1)) < 2e-5


def test_sorted_by_real_part(rng):
    lam = eigenvalues(rng.normal(size=(12, 12)))
    assert np.all(np.diff(lam.real) <= 0)


@pytest.mark.parametrize("n", [1, 2, 5, 30, 120])
def test_matches_lapack(n, rng):
    a = rng.normal(size=(n, n))
    ours = eigenvalues(a)
    ref = np.linalg.eigvals(a)
    # match each reference eigenvalue to its nearest computed one
    for z in ref:
        assert np.min(np.abs(ours - z)) < 1e-9 * max(1.0, abs(z))


def test_trace_and_determinant(rng):
    for _ in range(50):
        n = int(rng.integers(2, 15))
        a = rng.normal(size=(n, n))
        lam = eigenvalues(a)
        assert abs(lam.sum().real - np.trace(a)) <= 1e-8 * max(1.0, np.abs(a).sum())
        det = np.linalg.det(a)
        assert abs(np.prod(lam).real - det) <= 1e-8 * max(1.0, abs(det))


def test_badly_scaled_matrix():
    a = np.array([[1.0, 1e8, 0.0], [1e-8, 2.0, 1e8], [0.0, 1e-8, 3.0]])
    lam = eigenvalues(a)
    np.testing.assert_allclose(np.sort(lam.real), np.sort(np.linalg.eigvals(a).real), rtol=1e-10)


def test_balance_preserves_spectrum(rng):
    a = rng.normal(size=(6, 6)) * np.logspace(-4, 4, 6)[:, None]
    b = balance(a)
    np.testing.assert_allclose(np.sort_complex(np.linalg.eigvals(b)),
                               np.sort_complex(np.linalg.eigvals(a)), rtol=1e-9)


def test_hessenberg_shape_and_similarity(rng):
    a = rng.normal(size=(8, 8))
    h = hessenberg(a)
    assert np.all(np.tril(h, -2) == 0)
    assert np.trace(h) == pytest.approx(np.trace(a), rel=1e-12)
    assert np.linalg.norm(h) == pytest.approx(np.linalg.norm(a), rel=1e-12)


def test_iteration_cap():
    h = hessenberg(np.random.default_rng(1).normal(size=(6, 6)))
    with pytest.raises(NoConvergence):
        hessenberg_eigenvalues(h, max_iter=0)


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        eigenvalues(np.ones((2, 3)))
    with pytest.raises(ValueError):
        eigenvalues(np.array([[np.nan]]))


def test_max_real_part():
    assert max_real_part([-1 + 2j, -0.5, -3]) == -0.5
