"""Metric graphs: edge lengths, vertex conditions and piecewise-constant potentials."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from ..errors import InputError
from ..graph import Graph, build_graph, cycle_dimension

Piece = tuple[float, float]  # (start coordinate, potential value)

KIRCHHOFF = "kirchhoff"
ROBIN = "robin"
DIRICHLET = "dirichlet"


@dataclass(frozen=True)
class VertexCondition:
    """``ψ'cos α = ψ sin α`` with ψ' pointing into the edge.

    Kirchhoff means continuity plus zero total outgoing derivative; on a
    degree-one vertex it is the Neumann condition.
    """

    kind: str = KIRCHHOFF
    alpha: float = 0.0

    def __post_init__(self):
        if self.kind not in (KIRCHHOFF, ROBIN, DIRICHLET):
            raise InputError(f"unknown vertex condition {self.kind!r}")

    @property
    def tan_alpha(self) -> float:
        if self.kind == DIRICHLET:
            return math.inf
        if self.kind == KIRCHHOFF:
            return 0.0
        return math.tan(self.alpha)

    @classmethod
    def robin(cls, alpha: float) -> "VertexCondition":
        return cls(ROBIN, float(alpha))

    @classmethod
    def robin_slope(cls, a: float) -> "VertexCondition":
        """Robin condition ψ' = a ψ."""
        return cls(ROBIN, math.atan(a))


NEUMANN = VertexCondition()
DIRICHLET_BC = VertexCondition(DIRICHLET)


@dataclass(frozen=True)
class MetricGraph:
    graph: Graph
    lengths: tuple[float, ...]
    conditions: tuple[VertexCondition, ...]
    potentials: tuple[tuple[Piece, ...], ...] = field(default=())

    def __post_init__(self):
        g = self.graph
        if len(self.lengths) != len(g.edges):
            raise InputError("one length per edge is required")
        for e, length in enumerate(self.lengths):
            if not (length > 0 and math.isfinite(length)):
                raise InputError(f"edge {g.edges[e]} has non-positive length {length}")
        if len(self.conditions) != g.vertex_count:
            raise InputError("one vertex condition per vertex is required")
        for v, c in enumerate(self.conditions):
            if c.kind != KIRCHHOFF and g.degree(v) != 1:
                raise InputError(
                    f"vertex {v} has degree {g.degree(v)}; {c.kind} conditions need degree 1"
                )
        if not self.potentials:
            object.__setattr__(self, "potentials", tuple(((0.0, 0.0),) for _ in g.edges))
        if len(self.potentials) != len(g.edges):
            raise InputError("one potential per edge is required")
        for e, pieces in enumerate(self.potentials):
            starts = [s for s, _ in pieces]
            if not pieces or starts[0] != 0.0:
                raise InputError(f"potential on edge {e} must start at 0")
            if any(b <= a for a, b in zip(starts, starts[1:])) or starts[-1] >= self.lengths[e]:
                raise InputError(f"potential breakpoints on edge {e} are not inside (0, L)")

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return self.graph.edges

    @property
    def vertex_count(self) -> int:
        return self.graph.vertex_count

    @property
    def total_length(self) -> float:
        return float(sum(self.lengths))

    @property
    def ell(self) -> int:
        return cycle_dimension(self.graph)

    def piece_bounds(self, e: int) -> list[tuple[float, float, float]]:
        """(start, end, q) for each constant-potential piece of edge ``e``."""
        pieces = self.potentials[e]
        ends = [s for s, _ in pieces[1:]] + [self.lengths[e]]
        return [(s, t, q) for (s, q), t in zip(pieces, ends)]

    def min_potential(self) -> float:
        return min(q for pieces in self.potentials for _, q in pieces)

    def max_potential(self) -> float:
        return max(q for pieces in self.potentials for _, q in pieces)

    def incidences(self, v: int) -> list[tuple[int, bool]]:
        """(edge index, at_start) for each edge end touching ``v``."""
        out = []
        for e, (a, b) in enumerate(self.edges):
            if a == v:
                out.append((e, True))
            if b == v:
                out.append((e, False))
        return out

    def with_lengths(self, lengths: Sequence[float]) -> "MetricGraph":
        """Same graph with new lengths; potential breakpoints are rescaled."""
        pots = []
        for e, pieces in enumerate(self.potentials):
            ratio = lengths[e] / self.lengths[e]
            pots.append(tuple((s * ratio, q) for s, q in pieces))
        return replace(self, lengths=tuple(float(x) for x in lengths), potentials=tuple(pots))


def metric_graph(
    vertex_count: int,
    edges: Iterable[Sequence[int]],
    lengths: Sequence[float],
    conditions: Mapping[int, VertexCondition] | None = None,
    potentials: Sequence[Sequence[Piece]] | None = None,
) -> MetricGraph:
    g = build_graph(vertex_count, edges)
    conds = [NEUMANN] * vertex_count
    for v, c in (conditions or {}).items():
        conds[v] = c
    pots = tuple(tuple((float(s), float(q)) for s, q in p) for p in potentials) if potentials else ()
    return MetricGraph(g, tuple(float(x) for x in lengths), tuple(conds), pots)


def interval(length: float, left: VertexCondition = NEUMANN, right: VertexCondition = NEUMANN,
             q: float = 0.0) -> MetricGraph:
    return metric_graph(2, [(0, 1)], [length], {0: left, 1: right}, [[(0.0, q)]])


def star(lengths: Sequence[float], boundary: VertexCondition = DIRICHLET_BC) -> MetricGraph:
    """Star with centre 0 and leaves 1..N; edge j runs from leaf j+1 to the centre."""
    n = len(lengths)
    conds = {j: boundary for j in range(1, n + 1)}
    return metric_graph(n + 1, [(j, 0) for j in range(1, n + 1)], lengths, conds)
