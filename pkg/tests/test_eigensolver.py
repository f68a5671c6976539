import numpy as np
from hypothesis import given, settings, strategies as st

from nodalgraph.eigensolver import jacobi_eigh, lowest_eigenvalues, sturm_count, tridiagonalize


def random_symmetric(rng, n, spread=1.0):
    a = rng.normal(size=(n, n)) * spread
    return 0.5 * (a + a.T)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 24), st.integers(0, 2**32 - 1))
def test_jacobi_matches_lapack(n, seed):
    a = random_symmetric(np.random.default_rng(seed), n)
    values, vectors = jacobi_eigh(a)
    order = np.argsort(values)
    np.testing.assert_allclose(values[order], np.linalg.eigvalsh(a), atol=1e-11 * max(1, np.abs(a).max()))
    np.testing.assert_allclose(vectors.T @ vectors, np.eye(n), atol=1e-12)
    assert np.linalg.norm(a @ vectors - vectors * values) <= 1e-12 * max(1.0, np.linalg.norm(a))


def test_jacobi_repeated_eigenvalues():
    # the cycle C6 has double eigenvalues ±1
    n = 6
    a = np.zeros((n, n))
    for i in range(n):
        a[i, (i + 1) % n] = a[(i + 1) % n, i] = -1.0
    values, vectors = jacobi_eigh(a)
    np.testing.assert_allclose(np.sort(values), [-2, -1, -1, 1, 1, 2], atol=1e-13)
    np.testing.assert_allclose(vectors.T @ vectors, np.eye(n), atol=1e-13)


def test_jacobi_diagonal_and_scaled_input():
    d = np.diag([3.0, -1.0, 2.0])
    values, vectors = jacobi_eigh(d)
    np.testing.assert_array_equal(np.sort(values), [-1.0, 2.0, 3.0])
    big = random_symmetric(np.random.default_rng(3), 8, spread=1e150)
    np.testing.assert_allclose(np.sort(jacobi_eigh(big, vectors=False)[0]), np.linalg.eigvalsh(big), rtol=1e-10)


def test_tridiagonalize_preserves_spectrum():
    a = random_symmetric(np.random.default_rng(7), 15)
    d, e = tridiagonalize(a)
    t = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
    np.testing.assert_allclose(np.linalg.eigvalsh(t), np.linalg.eigvalsh(a), atol=1e-12)


def test_sturm_count_and_lowest():
    a = random_symmetric(np.random.default_rng(11), 30)
    exact = np.linalg.eigvalsh(a)
    d, e = tridiagonalize(a)
    for x in (-10.0, exact[4] + 1e-9, 0.0, 10.0):
        assert sturm_count(d, e, x) == int(np.sum(exact < x))
    np.testing.assert_allclose(lowest_eigenvalues(a, 7), exact[:7], atol=1e-11)


def test_lowest_on_single_entry():
    assert lowest_eigenvalues(np.array([[2.5]]), 3).tolist() == [2.5]
