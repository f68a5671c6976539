"""Nodal domains of metric-graph eigenfunctions and the cut-to-tree construction."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from ..errors import (
    DirichletForm,
    IdenticallyZeroEdge,
    InputError,
    NoNonzeroCutPoint,
    ZeroAtVertex,
)
from ..graph import UnionFind, build_graph, is_tree
from .edge import EdgeSolution, edge_zeros
from .graph import DIRICHLET, MetricGraph, VertexCondition
from .spectrum import MetricEigenpair, eigenfunction, find_eigenvalues, vertex_residual

VERTEX_ZERO_RTOL = 1e-8
CUT_SAMPLES = 512


def _solutions(mg: MetricGraph, pair: MetricEigenpair) -> tuple[EdgeSolution, ...]:
    if pair.solutions is None:
        pair = eigenfunction(mg, pair)
    return pair.solutions


def _scale(sols) -> float:
    return max(s.amplitude() for s in sols)


def _end_values(mg: MetricGraph, sols, v: int) -> list[float]:
    return [sols[e].value_at_start if at else sols[e].at_end()[0] for e, at in mg.incidences(v)]


def metric_nodal_count(
    mg: MetricGraph, pair: MetricEigenpair, allow_nongeneric: bool = False
) -> int:
    """Number of maximal connected pieces of the graph on which ψ keeps a strict sign.

    Each edge is split at its interior zeros into segments; segments meeting at
    a vertex where ψ does not vanish are merged. With ``allow_nongeneric`` the
    count runs over the support of ψ: identically-zero edges are skipped and a
    vanishing vertex separates the segments meeting there.
    """
    sols = _solutions(mg, pair)
    scale = _scale(sols)
    tol = VERTEX_ZERO_RTOL * scale
    zero_vertex = []
    for v in range(mg.vertex_count):
        value = max(abs(x) for x in _end_values(mg, sols, v))
        zero_vertex.append(value <= tol)
        if value <= tol and mg.conditions[v].kind != DIRICHLET and not allow_nongeneric:
            raise ZeroAtVertex(f"eigenfunction vanishes at vertex {v}", vertex=v)

    first: dict[int, int] = {}
    last: dict[int, int] = {}
    total = 0
    for e, sol in enumerate(sols):
        try:
            zeros = edge_zeros(sol, scale=scale)
        except IdenticallyZeroEdge:
            if allow_nongeneric:
                continue
            raise
        first[e] = total
        total += len(zeros) + 1
        last[e] = total - 1

    uf = UnionFind(total)
    for v in range(mg.vertex_count):
        if zero_vertex[v]:
            continue
        ends = [first[e] if at else last[e] for e, at in mg.incidences(v) if e in first]
        for a, b in zip(ends, ends[1:]):
            uf.union(a, b)
    return uf.components if total else 0


def quadratic_form_metric(mg: MetricGraph, sols: Sequence[EdgeSolution]) -> float:
    """Σ_e ∫ (f'² + q f²) + Σ_{deg v = 1} tan α_v f(v)².

    ``f`` is given edge by edge as solutions of the edge equation, each with its
    own spectral parameter, so every integral is exact. A Dirichlet vertex
    belongs to the domain only through ``f(v) = 0``.
    """
    if len(sols) != len(mg.edges):
        raise InputError("one edge function per edge is required")
    total = sum(s.energy() for s in sols)
    scale = max((s.amplitude() for s in sols), default=0.0)
    for v, cond in enumerate(mg.conditions):
        if mg.graph.degree(v) != 1:
            continue
        (value,) = _end_values(mg, sols, v)
        if cond.kind == DIRICHLET:
            if abs(value) > VERTEX_ZERO_RTOL * max(scale, 1e-300):
                raise DirichletForm(f"f({v}) = {value:.3g} at a Dirichlet vertex")
            continue
        total += cond.tan_alpha * value * value
    return float(total)


@dataclass(frozen=True)
class CutResult:
    """A tree obtained by cutting one point on each edge of a co-tree set.

    ``robin_data`` holds ``(u_plus, a_plus, u_minus, a_minus)`` per cut: the two
    new boundary vertices and the slopes ``ψ'/ψ`` (inward) imposed there.
    """

    tree: MetricGraph
    robin_data: tuple[tuple[int, float, int, float], ...]
    cut_points: tuple[tuple[tuple[int, int], float], ...]
    solutions: tuple[EdgeSolution, ...]

    @property
    def worst_antisymmetry(self) -> float:
        return max((abs(ap + am) for _, ap, _, am in self.robin_data), default=0.0)


def _cut_point(sol: EdgeSolution, scale: float) -> float:
    """Interior point of largest |ψ|."""
    length = sol.length
    xs = np.linspace(0.0, length, CUT_SAMPLES + 1)[1:-1]
    vals = np.abs(sol.evaluate_many(xs))
    i = int(np.argmax(vals))
    if vals[i] <= VERTEX_ZERO_RTOL * scale:
        raise NoNonzeroCutPoint(f"eigenfunction vanishes on cut edge {sol.edge}")
    lo = xs[i - 1] if i > 0 else 0.5 * xs[0]
    hi = xs[i + 1] if i + 1 < len(xs) else 0.5 * (xs[-1] + length)
    res = minimize_scalar(
        lambda x: -abs(sol.evaluate(x)[0]), bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-12 * length},
    )
    x = float(res.x) if -res.fun >= vals[i] else float(xs[i])
    return x


def _split_pieces(pieces, x: float):
    left = tuple((s, q) for s, q in pieces if s < x)
    right = []
    for (s, q), nxt in zip(pieces, list(pieces[1:]) + [(math.inf, None)]):
        if nxt[0] <= x:
            continue
        right.append((max(s - x, 0.0), q))
    return left, tuple(right)


def cut_to_tree(
    mg: MetricGraph, pair: MetricEigenpair, cut_edges: Sequence[Sequence[int]]
) -> CutResult:
    """Cut every edge of ``cut_edges`` where |ψ| is largest and impose Robin ends.

    The new vertices of cut ``j`` are ``|V| + 2j`` (on the side of the edge's
    first endpoint) and ``|V| + 2j + 1``. The restriction of ψ solves the tree
    problem with the slopes ``a = ψ'/ψ`` taken in the inward direction.
    """
    sols = list(_solutions(mg, pair))
    scale = _scale(sols)
    cut_ids = []
    for u, v in cut_edges:
        e = mg.graph.edge_index(int(u), int(v))
        if e in cut_ids:
            raise InputError(f"edge ({u}, {v}) listed twice")
        cut_ids.append(e)
    if not cut_ids:
        return CutResult(mg, (), (), tuple(sols))

    base = mg.vertex_count
    edges, lengths, pots, tree_sols = [], [], [], []
    conds: list[VertexCondition] = list(mg.conditions)
    for e, uv in enumerate(mg.edges):
        if e not in cut_ids:
            edges.append(uv)
            lengths.append(mg.lengths[e])
            pots.append(mg.potentials[e])
            tree_sols.append(sols[e])
    robin, points = [], []
    for j, e in enumerate(cut_ids):
        u, v = mg.edges[e]
        sol = sols[e]
        x = _cut_point(sol, scale)
        plus, minus = base + 2 * j, base + 2 * j + 1
        left_pots, right_pots = _split_pieces(mg.potentials[e], x)
        y, p = sol.evaluate(x)
        left = EdgeSolution((u, plus), sol.value_at_start, sol.slope_at_start,
                            sol.lambda_, x, left_pots)
        right = EdgeSolution((minus, v), y, p, sol.lambda_, sol.length - x, right_pots)
        y_plus, p_plus = left.at_end()
        a_plus = -p_plus / y_plus
        a_minus = right.slope_at_start / right.value_at_start
        conds += [VertexCondition.robin_slope(a_plus), VertexCondition.robin_slope(a_minus)]
        edges += [(u, plus), (minus, v)]
        lengths += [x, sol.length - x]
        pots += [left_pots, right_pots]
        tree_sols += [left, right]
        robin.append((plus, a_plus, minus, a_minus))
        points.append(((u, v), x))
    graph = build_graph(base + 2 * len(cut_ids), edges)
    if not is_tree(graph):
        raise InputError("cut edges do not leave a spanning tree")
    tree = MetricGraph(graph, tuple(lengths), tuple(conds), tuple(pots))
    return CutResult(tree, tuple(robin), tuple(points), tuple(tree_sols))


def cut_residual(cut: CutResult) -> float:
    return vertex_residual(cut.tree, cut.solutions)


def preserved_index(tree: MetricGraph, lam: float, rtol: float = 1e-8) -> tuple[int, list[MetricEigenpair]]:
    """Index m with μ_m = λ in the tree spectrum (the first index on a repeated value)."""
    pairs = find_eigenvalues(tree, lambda_max=lam + max(1.0, abs(lam)) * 1e-3 + 1e-6)
    tol = rtol * max(1.0, abs(lam))
    for p in pairs:
        if abs(p.lambda_ - lam) <= tol:
            return p.n, pairs
    raise InputError(f"λ={lam} is not in the cut spectrum")
