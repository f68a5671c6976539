import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nodalgraph.discrete import (
    assemble_hamiltonian,
    check_genericity,
    cut_with_surgery,
    cycle_graph,
    eigen_decompose,
    nodal_count,
    path_graph,
    quadratic_form,
    support_nodal_count,
    verify_bounds,
)
from nodalgraph.errors import DisconnectingCut, VanishingEndpoint, ZeroSign
from nodalgraph.graph import build_graph
from nodalgraph.verify import random_graph


def test_hamiltonian_layout():
    h = assemble_hamiltonian(path_graph(3), [1.0, 2.0, 3.0])
    np.testing.assert_array_equal(h, [[1, -1, 0], [-1, 2, -1], [0, -1, 3]])


def test_p2_spectrum():
    s = eigen_decompose(assemble_hamiltonian(path_graph(2), None))
    np.testing.assert_allclose(s.eigenvalues, [-1.0, 1.0], atol=1e-14)
    np.testing.assert_allclose(np.abs(s.eigenvectors), 1 / math.sqrt(2), atol=1e-14)
    assert s.eigenvectors[1][0] > 0 > s.eigenvectors[1][1]


@pytest.mark.parametrize("n", [3, 5, 8, 13])
def test_path_spectrum_and_sturm_counts(n):
    s = eigen_decompose(assemble_hamiltonian(path_graph(n), None))
    exact = sorted(-2 * math.cos(j * math.pi / (n + 1)) for j in range(1, n + 1))
    np.testing.assert_allclose(s.eigenvalues, exact, atol=1e-12)
    for j in range(1, n + 1):
        if check_genericity(s, j).generic:
            assert nodal_count(path_graph(n), s.pair(j)[1]) == j


def test_cycle_is_degenerate():
    s = eigen_decompose(assemble_hamiltonian(cycle_graph(6), None))
    assert not check_genericity(s, 2).simple
    assert check_genericity(s, 1).generic


def test_p3_middle_vector_vanishes():
    s = eigen_decompose(assemble_hamiltonian(path_graph(3), None))
    gen = check_genericity(s, 2)
    assert gen.simple and not gen.nonvanishing
    with pytest.raises(ZeroSign):
        nodal_count(path_graph(3), s.pair(2)[1])
    assert support_nodal_count(path_graph(3), s.pair(2)[1]) == 2


def test_quadratic_form_matches_matrix(rng):
    g = random_graph(rng, 8, 3)
    q = rng.uniform(-1, 1, 8)
    psi = rng.normal(size=8)
    h = assemble_hamiltonian(g, q)
    assert quadratic_form(g, q, psi) == pytest.approx(psi @ h @ psi, rel=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_bounds_hold_on_random_graphs(seed):
    rng = np.random.default_rng(seed)
    v = int(rng.integers(3, 10))
    ell = int(rng.integers(0, min(4, v * (v - 1) // 2 - v + 1) + 1))
    g = random_graph(rng, v, ell)
    for r in verify_bounds(g, rng.uniform(-1, 1, v)):
        if r.generic:
            assert r.lower_ok and r.upper_ok
            if ell == 0:
                assert r.nu == r.n


def triangle():
    return build_graph(3, [(0, 1), (1, 2), (2, 0)])


def test_surgery_keeps_eigenpair(rng):
    g = triangle()
    q = np.array([0.3, -0.2, 0.5])
    s = eigen_decompose(assemble_hamiltonian(g, q))
    for n in range(1, 4):
        lam, phi = s.pair(n)
        gamma, p, alpha = cut_with_surgery(g, q, phi, (0, 1))
        h = assemble_hamiltonian(gamma, p)
        assert np.linalg.norm(h @ phi - lam * phi) <= 1e-12
        assert alpha == pytest.approx(phi[1] / phi[0])
        # the shifted form differs from the original one by a perfect square
        psi = rng.normal(size=3)
        delta = quadratic_form(gamma, p, psi) - quadratic_form(g, q, psi)
        assert delta == pytest.approx(-(psi[0] * math.sqrt(abs(alpha)) - np.sign(alpha) * psi[1] / math.sqrt(abs(alpha))) ** 2 * np.sign(alpha), abs=1e-12)


def test_surgery_errors():
    g = path_graph(3)
    s = eigen_decompose(assemble_hamiltonian(g, [0.1, 0.2, 0.3]))
    with pytest.raises(DisconnectingCut):
        cut_with_surgery(g, [0.1, 0.2, 0.3], s.pair(1)[1], (0, 1))
    with pytest.raises(DisconnectingCut):
        cut_with_surgery(g, [0.1, 0.2, 0.3], s.pair(1)[1], (0, 2))
    t = triangle()
    phi = np.array([1.0, 0.0, -1.0])
    with pytest.raises(VanishingEndpoint):
        cut_with_surgery(t, None, phi, (0, 1))
