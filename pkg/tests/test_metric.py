import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from nodalgraph.errors import (
    DegenerateChoice,
    DirichletForm,
    IdenticallyZeroEdge,
    InputError,
    PoleProximity,
    ZeroAtVertex,
)
from nodalgraph.graph import spanning_cut_set
from nodalgraph.metric.edge import EdgeSolution, edge_zeros
from nodalgraph.metric.graph import (
    DIRICHLET_BC,
    NEUMANN,
    VertexCondition,
    interval,
    metric_graph,
    star,
)
from nodalgraph.metric.nodal import (
    cut_residual,
    cut_to_tree,
    metric_nodal_count,
    preserved_index,
    quadratic_form_metric,
)
from nodalgraph.metric.shooting import shooting_count, shooting_eigenvalues, shooting_sweep
from nodalgraph.metric.spectrum import (
    count_below,
    eigenfunction,
    find_eigenvalues,
    secular_value,
    vertex_residual,
    weyl_deviation,
)
from nodalgraph.metric.star import (
    analyse_counterexample,
    build_star_counterexample,
    commensurate_pairs,
    counterexample_lengths,
    star_secular,
)

# Neumann star with lengths (1, 0.8, 1.3): λ = 0 and the roots of
# tan k + tan 0.8k + tan 1.3k = 0, solved with mpmath.findroot at 30 digits
NEUMANN_STAR = [
    0.0,
    1.7836015598213562704,
    3.1136065503274804121,
    9.1338000455099738012,
    16.647072710226177836,
    26.755371918405874744,
    35.817823775081796613,
]


def edge(y, p, lam, length, pieces=((0.0, 0.0),)):
    return EdgeSolution((0, 1), y, p, lam, length, pieces)


@settings(max_examples=50, deadline=None)
@given(
    st.floats(-2, 2), st.floats(-2, 2), st.floats(-30, 60), st.floats(0.2, 2.0),
    st.floats(-5, 5), st.floats(0.1, 0.9),
)
def test_norm_and_energy_against_quadrature(y, p, lam, length, q2, split):
    sol = edge(y, p, lam, length, ((0.0, 0.0), (split * length, q2)))
    f = lambda x: sol.evaluate(x)[0] ** 2
    bp = [split * length]
    assert sol.norm_squared() == pytest.approx(quad(f, 0, length, points=bp, epsabs=1e-13)[0], rel=1e-8, abs=1e-11)
    g = lambda x: sol.evaluate(x)[1] ** 2 + (q2 if x > split * length else 0.0) * f(x)
    assert sol.energy() == pytest.approx(quad(g, 0, length, points=bp, epsabs=1e-13)[0], rel=1e-7, abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-30, 60), st.floats(0.2, 2.0), st.floats(0, 1))
def test_reversal_consistency(y, p, lam, length, t):
    sol = edge(y, p, lam, length, ((0.0, 1.0), (0.3 * length, -2.0)))
    rev = sol.reversed()
    x = t * length
    a, da = sol.evaluate(x)
    b, db = rev.evaluate(length - x)
    # transport in either direction loses accuracy relative to the largest state on the edge
    scale = max(1.0, *(abs(c) for s in np.linspace(0.0, length, 9) for c in sol.evaluate(s)))
    assert abs(a - b) <= 1e-10 * scale and abs(da + db) <= 1e-10 * scale


def test_edge_zeros_analytic():
    cos3 = edge(1.0, 0.0, 9.0, math.pi)
    assert edge_zeros(cos3) == pytest.approx([math.pi / 6, math.pi / 2, 5 * math.pi / 6], abs=1e-14)
    assert edge_zeros(edge(1.0, 0.0, 0.0, 2.0)) == []
    k = 3 * math.pi
    assert edge_zeros(edge(0.0, k, k * k, 1.0)) == pytest.approx([1 / 3, 2 / 3], abs=1e-14)
    with pytest.raises(IdenticallyZeroEdge):
        edge_zeros(edge(0.0, 0.0, 4.0, 1.0))


def test_edge_zeros_hyperbolic_and_linear():
    # sinh(x) - 0.5 cosh(x)·... : y = 1, p = -2 with μ = -1 vanishes at atanh(1/2)
    assert edge_zeros(edge(1.0, -2.0, -1.0, 3.0)) == pytest.approx([math.atanh(0.5)])
    assert edge_zeros(edge(1.0, -2.0, 0.0, 3.0)) == pytest.approx([0.5])


def test_interval_neumann_spectrum():
    mg = interval(math.pi)
    pairs = find_eigenvalues(mg, count=8)
    np.testing.assert_allclose([p.lambda_ for p in pairs], [n * n for n in range(8)], atol=1e-11)
    assert [metric_nodal_count(mg, p) for p in pairs] == list(range(1, 9))


def test_interval_neumann_secular_zeros():
    mg = interval(math.pi)
    for n in range(5):
        assert abs(secular_value(mg, n * n)) <= 1e-10
        assert abs(secular_value(mg, n * n + 0.5)) > 1e-3
    assert abs(secular_value(mg, -4.0)) > 1e-3


def test_interval_eigenfunctions():
    mg = interval(math.pi)
    pairs = find_eigenvalues(mg, count=2)
    first = eigenfunction(mg, pairs[0]).solutions[0]
    xs = np.linspace(0, math.pi, 7)
    np.testing.assert_allclose(first.evaluate_many(xs), 1 / math.sqrt(math.pi), atol=1e-12)
    second = eigenfunction(mg, pairs[1]).solutions[0]
    np.testing.assert_allclose(second.evaluate_many(xs), math.sqrt(2 / math.pi) * np.cos(xs), atol=1e-10)


def test_two_edge_star_matches_interval():
    pairs = find_eigenvalues(star([1.0, 0.7]), count=6)
    np.testing.assert_allclose([p.k for p in pairs], [n * math.pi / 1.7 for n in range(1, 7)], rtol=1e-12)


def test_equilateral_star_multiplicity():
    mg = star([1.0, 1.0, 1.0])
    pairs = find_eigenvalues(mg, count=3)
    assert pairs[0].k == pytest.approx(math.pi / 2)
    assert pairs[1].multiplicity == pairs[2].multiplicity == 2
    assert pairs[1].k == pytest.approx(math.pi, abs=1e-12)
    assert pairs[1].multiplicity_flag
    with pytest.raises(DegenerateChoice):
        eigenfunction(mg, pairs[1])
    for b in range(2):
        f = eigenfunction(mg, pairs[1], basis_index=b)
        assert vertex_residual(mg, f.solutions) <= 1e-9


def test_neumann_star_against_frozen_roots():
    mg = metric_graph(4, [(1, 0), (2, 0), (3, 0)], [1.0, 0.8, 1.3])
    pairs = find_eigenvalues(mg, count=len(NEUMANN_STAR))
    np.testing.assert_allclose([p.lambda_ for p in pairs], NEUMANN_STAR, rtol=1e-11, atol=1e-11)
    for p in pairs:
        f = eigenfunction(mg, p)
        assert vertex_residual(mg, f.solutions) <= 1e-9
        assert quadratic_form_metric(mg, f.solutions) == pytest.approx(p.lambda_, rel=1e-8, abs=1e-8)
        assert metric_nodal_count(mg, f) == p.n


def test_robin_interval_matches_transcendental_equation():
    # ψ' = a ψ at x = 0 (inward), Neumann at x = 1: k tan k = -a for the cos-type branch
    a = 0.7
    mg = interval(1.0, VertexCondition.robin_slope(a), NEUMANN)
    pairs = find_eigenvalues(mg, count=4)
    for p in pairs:
        k = math.sqrt(p.lambda_) if p.lambda_ > 0 else 0.0
        # ψ = cos(k(1 - x)): ψ'(0)/ψ(0) = k tan k
        assert k * math.tan(k) == pytest.approx(a, rel=1e-9)
    negative = interval(1.0, VertexCondition.robin_slope(-0.7), NEUMANN)
    assert find_eigenvalues(negative, count=1)[0].lambda_ < 0


def test_counting_function_is_monotone():
    mg = metric_graph(4, [(0, 1), (1, 2), (2, 0), (2, 3)], [0.9, 1.1, 1.3, 0.7])
    counts = [count_below(mg, lam) for lam in np.linspace(-1, 80, 400)]
    assert all(a <= b for a, b in zip(counts, counts[1:]))


def test_weyl_audit_on_tree(rng):
    mg = metric_graph(5, [(0, 1), (1, 2), (1, 3), (3, 4)], rng.uniform(0.5, 1.5, 4))
    pairs = find_eigenvalues(mg, count=40)
    ks = np.linspace(0, pairs[-1].k, 200)
    assert weyl_deviation(mg, pairs, ks) <= mg.vertex_count + mg.ell + 2


def test_quadratic_form_examples():
    mg = interval(2.0)
    assert quadratic_form_metric(mg, [edge(1.0, 0.0, 0.0, 2.0)]) == 0.0
    robin = interval(1.0, VertexCondition.robin(0.3), NEUMANN)
    assert quadratic_form_metric(robin, [edge(1.0, 0.0, 0.0, 1.0)]) == pytest.approx(math.tan(0.3))
    with pytest.raises(DirichletForm):
        quadratic_form_metric(interval(1.0, DIRICHLET_BC), [edge(1.0, 0.0, 0.0, 1.0)])


def test_non_generic_vertex_zero():
    mg = metric_graph(4, [(0, 1), (1, 2), (2, 0), (2, 3)], [0.9, 1.1, 1.3, 0.7])
    pairs = find_eigenvalues(mg, count=3)
    # a sine mode of the hanging triangle vanishes where it is attached
    with pytest.raises(ZeroAtVertex):
        metric_nodal_count(mg, pairs[2])
    assert metric_nodal_count(mg, pairs[2], allow_nongeneric=True) == 2


def test_star_secular():
    assert star_secular([1.0, 1.0], math.pi / 2) == pytest.approx(0.0, abs=1e-15)
    assert star_secular([2.0], 1.5 * math.pi / 2) == pytest.approx(0.0, abs=1e-15)
    lengths = counterexample_lengths(3, 4)
    with pytest.raises(PoleProximity):
        star_secular(lengths, 3 * math.pi)
    below, above = star_secular(lengths, 3 * math.pi - 1e-6), star_secular(lengths, 3 * math.pi + 1e-6)
    assert below < -1e5 and above > 1e5


def test_counterexample_construction():
    assert counterexample_lengths(3, 5)[2:] == pytest.approx([1 + math.sqrt(p) / 100 for p in (2, 3, 5)])
    assert commensurate_pairs(counterexample_lengths(4, 6)) == []
    assert commensurate_pairs([1.0, 0.5, 1.5]) == [(0, 2, 3, 2), (1, 2, 3, 1)]
    with pytest.raises(InputError):
        build_star_counterexample(1, 4)
    with pytest.raises(InputError):
        build_star_counterexample(2, 2)


@pytest.mark.parametrize("m,n_edges", [(2, 3), (3, 4), (4, 4)])
def test_counterexample_eigenfunction(m, n_edges):
    r = analyse_counterexample(m, n_edges)
    assert abs(r.k - m * math.pi) <= 1e-9
    assert r.nu == m + 1
    assert r.vanishes_at_centre
    assert r.support_edges == (0, 1)
    # every edge longer than 1 carries m cotangent poles below mπ, edge 1 carries
    # m - 1 and edge 2 none; the cotangent sum has one root per branch
    assert r.index == m * (n_edges - 1) + 1


def test_shooting_single_edge():
    mg = interval(1.3)
    for lam in (0.3, 2.0, 7.0):
        k = math.sqrt(lam)
        assert shooting_sweep(mg, lam, 1).root_value == pytest.approx(-k * math.tan(k * 1.3), rel=1e-12)
    s = shooting_sweep(mg, -2.0, 1)
    assert s.interior_zeros == 0 and math.isfinite(s.root_value)
    with pytest.raises(InputError):
        shooting_sweep(metric_graph(3, [(0, 1), (1, 2)], [1, 1]), 1.0, 1)


def random_tree(rng, size, robin=True):
    from nodalgraph.graph import build_graph

    edges = [(int(rng.integers(0, v)), v) for v in range(1, size)]
    g = build_graph(size, edges)
    conds = {}
    for v in range(size):
        if g.degree(v) == 1 and robin:
            r = rng.random()
            conds[v] = DIRICHLET_BC if r < 0.3 else VertexCondition.robin(rng.uniform(-1, 1)) if r < 0.6 else NEUMANN
    lengths = rng.uniform(0.5, 1.5, size - 1)
    pots = [[(0.0, rng.uniform(-2, 2)), (lengths[e] / 2, rng.uniform(-2, 2))] for e in range(size - 1)]
    return metric_graph(size, edges, lengths, conds, pots)


def test_shooting_agrees_with_secular(rng):
    for _ in range(6):
        mg = random_tree(rng, 7)
        secular = [p.lambda_ for p in find_eigenvalues(mg, lambda_max=120.0)]
        for root in [v for v in range(7) if mg.graph.degree(v) == 1]:
            shot = shooting_eigenvalues(mg, 120.0, root)
            np.testing.assert_allclose(shot, secular, atol=1e-8 * 120)


def test_shooting_zero_motion(rng):
    mg = random_tree(rng, 6, robin=False)
    root = next(v for v in range(6) if mg.graph.degree(v) == 1)
    eig = shooting_eigenvalues(mg, 60.0, root)
    grid = np.linspace(eig[0] - 1, 60.0, 3000)
    zeros = [shooting_sweep(mg, lam, root).interior_zeros for lam in grid]
    assert all(a <= b for a, b in zip(zeros, zeros[1:]))
    for lo, hi in zip(eig, eig[1:]):
        inside = [z for lam, z in zip(grid, zeros) if lo < lam < hi]
        if inside:
            assert shooting_count(mg, 0.5 * (lo + hi), root) == eig.index(lo) + 1
    for lam in eig:
        assert shooting_count(mg, lam + 1e-7, root) - shooting_count(mg, lam - 1e-7, root) == 1


def test_cut_loop_to_interval():
    mg = metric_graph(3, [(0, 1), (1, 2), (2, 0)], [0.8, 1.1, 1.4])
    pairs = find_eigenvalues(mg, count=2)
    assert pairs[1].multiplicity == 2
    f = eigenfunction(mg, pairs[1], basis_index=0)
    cut = cut_to_tree(mg, f, spanning_cut_set(mg.graph))
    assert cut.tree.vertex_count == 5 and len(cut.tree.edges) == 4
    assert cut.worst_antisymmetry <= 1e-9
    assert cut_residual(cut) <= 1e-9
    m, _ = preserved_index(cut.tree, f.lambda_)
    assert m >= 2


def test_cut_with_no_cycles_is_identity():
    mg = interval(1.0)
    pair = find_eigenvalues(mg, count=2)[1]
    cut = cut_to_tree(mg, pair, [])
    assert cut.tree is mg and cut.robin_data == ()


def test_cut_fig1_metric(rng):
    edges = [(0, 1), (0, 2), (5, 3), (5, 4), (0, 5), (5, 6), (1, 2), (3, 4)]
    mg = metric_graph(7, edges, rng.uniform(0.9, 1.1, len(edges)))
    pairs = find_eigenvalues(mg, count=4)
    f = eigenfunction(mg, pairs[3])
    cut = cut_to_tree(mg, f, spanning_cut_set(mg.graph))
    assert len(cut.tree.edges) == len(edges) + 2
    assert cut.tree.vertex_count == 7 + 4
    assert cut.worst_antisymmetry <= 1e-9 and cut_residual(cut) <= 1e-9
    m, tree_pairs = preserved_index(cut.tree, f.lambda_)
    assert m >= 4
    base = [p.lambda_ for p in pairs]
    assert all(mu <= lam + 1e-9 for mu, lam in zip([p.lambda_ for p in tree_pairs], base))


def test_cut_form_identity(rng):
    mg = metric_graph(4, [(0, 1), (1, 2), (2, 0), (2, 3)], [0.9, 1.1, 1.3, 0.7],
                      potentials=[[(0.0, 0.4)], [(0.0, -1.0), (0.5, 2.0)], [(0.0, 0.0)], [(0.0, 1.5)]])
    pair = eigenfunction(mg, find_eigenvalues(mg, count=2)[1])
    cut = cut_to_tree(mg, pair, spanning_cut_set(mg.graph))
    (cut_edge, x), = cut.cut_points
    e_cut = mg.graph.edge_index(*cut_edge)
    for _ in range(10):
        f = [EdgeSolution(uv, rng.normal(), rng.normal(), rng.uniform(-5, 30), mg.lengths[e], mg.potentials[e])
             for e, uv in enumerate(mg.edges)]
        on_tree = [s for e, s in enumerate(f) if e != e_cut]
        g = f[e_cut]
        left_pots, right_pots = cut.tree.potentials[-2], cut.tree.potentials[-1]
        y, p = g.evaluate(x)
        on_tree.append(EdgeSolution(cut.tree.edges[-2], g.value_at_start, g.slope_at_start, g.lambda_, x, left_pots))
        on_tree.append(EdgeSolution(cut.tree.edges[-1], y, p, g.lambda_, g.length - x, right_pots))
        assert quadratic_form_metric(cut.tree, on_tree) == pytest.approx(quadratic_form_metric(mg, f), rel=1e-10, abs=1e-10)
