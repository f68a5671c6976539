"""Combinatorial graphs: validation, cycle rank, rooted trees and sign domains."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import DisconnectedGraph, NotATree, ParallelEdge, SelfLoop, ZeroSign

Edge = tuple[int, int]


class UnionFind:
    """Disjoint sets with path halving and union by size."""

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.size = [1] * size
        self.components = size

    def find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.components -= 1
        return True


@dataclass(frozen=True)
class Graph:
    """Simple connected undirected graph on vertices ``0..vertex_count-1``.

    ``edges`` keeps the caller's orientation; metric graphs use it to fix the
    coordinate direction on each edge.
    """

    vertex_count: int
    edges: tuple[Edge, ...]
    adjacency: tuple[tuple[int, ...], ...] = field(repr=False, compare=False)

    @property
    def directed_edges(self) -> tuple[Edge, ...]:
        return tuple(self.edges) + tuple((v, u) for u, v in self.edges)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def edge_index(self, u: int, v: int) -> int:
        for i, (a, b) in enumerate(self.edges):
            if (a, b) == (u, v) or (a, b) == (v, u):
                return i
        raise KeyError((u, v))

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency[u]

    def without_edges(self, removed: Iterable[Edge]) -> "Graph":
        drop = {frozenset(e) for e in removed}
        kept = [e for e in self.edges if frozenset(e) not in drop]
        return build_graph(self.vertex_count, kept)


def _adjacency(vertex_count: int, edges: Sequence[Edge]) -> tuple[tuple[int, ...], ...]:
    adj: list[list[int]] = [[] for _ in range(vertex_count)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    return tuple(tuple(sorted(a)) for a in adj)


def _reachable(vertex_count: int, adjacency) -> list[bool]:
    seen = [False] * vertex_count
    seen[0] = True
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for w in adjacency[u]:
            if not seen[w]:
                seen[w] = True
                queue.append(w)
    return seen


def build_graph(vertex_count: int, edge_list: Iterable[Sequence[int]]) -> Graph:
    """Validate an edge list and return a connected simple ``Graph``."""
    if vertex_count < 1:
        raise DisconnectedGraph("a graph needs at least one vertex")
    edges: list[Edge] = []
    seen: set[frozenset[int]] = set()
    for pair in edge_list:
        u, v = (int(x) for x in pair)
        for x in (u, v):
            if not 0 <= x < vertex_count:
                raise DisconnectedGraph(f"vertex {x} out of range 0..{vertex_count - 1}")
        if u == v:
            raise SelfLoop(f"self-loop at vertex {u}; subdivide it with two dummy vertices")
        key = frozenset((u, v))
        if key in seen:
            raise ParallelEdge(
                f"parallel edge ({u}, {v}); subdivide one copy with a degree-2 dummy vertex"
            )
        seen.add(key)
        edges.append((u, v))
    if not edges and vertex_count > 1:
        raise DisconnectedGraph("edge list is empty")
    adjacency = _adjacency(vertex_count, edges)
    reach = _reachable(vertex_count, adjacency)
    if not all(reach):
        missing = reach.index(False)
        raise DisconnectedGraph(f"vertex {missing} is not reachable from vertex 0")
    return Graph(vertex_count, tuple(edges), adjacency)


def cycle_dimension(g: Graph) -> int:
    return len(g.edges) - g.vertex_count + 1


def is_tree(g: Graph) -> bool:
    return cycle_dimension(g) == 0


def spanning_cut_set(g: Graph) -> list[Edge]:
    """Edges outside a depth-first spanning tree rooted at vertex 0.

    Neighbours are visited in ascending order, so the result is deterministic.
    Removing the returned edges leaves a spanning tree.
    """
    visited = [False] * g.vertex_count
    tree_edges: set[frozenset[int]] = set()
    stack = [(0, iter(g.adjacency[0]))]
    visited[0] = True
    while stack:
        u, it = stack[-1]
        for w in it:
            if not visited[w]:
                visited[w] = True
                tree_edges.add(frozenset((u, w)))
                stack.append((w, iter(g.adjacency[w])))
                break
        else:
            stack.pop()
    return [e for e in g.edges if frozenset(e) not in tree_edges]


@dataclass(frozen=True)
class RootedTree:
    graph: Graph
    root: int
    parent: Mapping[int, int]
    topo_order: tuple[int, ...]
    children: Mapping[int, tuple[int, ...]]

    def is_below(self, v: int, u: int) -> bool:
        """True when the path from ``v`` to the root passes through ``u`` (v < u)."""
        if v == u:
            return False
        while v != self.root:
            v = self.parent[v]
            if v == u:
                return True
        return False


def root_tree(g: Graph, root: int) -> RootedTree:
    """Orient a tree towards ``root``; ``topo_order`` lists children before parents."""
    if not is_tree(g):
        raise NotATree(f"graph has cycle dimension {cycle_dimension(g)}")
    if not 0 <= root < g.vertex_count:
        raise NotATree(f"root {root} is not a vertex")
    parent: dict[int, int] = {}
    order = [root]
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for w in g.adjacency[u]:
            if w != root and w not in parent and w != parent.get(u):
                parent[w] = u
                order.append(w)
                queue.append(w)
    children: dict[int, list[int]] = {v: [] for v in range(g.vertex_count)}
    for v, u in parent.items():
        children[u].append(v)
    return RootedTree(
        graph=g,
        root=root,
        parent=parent,
        topo_order=tuple(reversed(order)),
        children={v: tuple(sorted(c)) for v, c in children.items()},
    )


def sign_components(g: Graph, signs: Mapping[int, int] | Sequence[int]) -> int:
    """Number of maximal connected constant-sign subgraphs."""
    s = [signs[v] for v in range(g.vertex_count)]
    for v, sv in enumerate(s):
        if sv == 0:
            raise ZeroSign(f"sign pattern vanishes at vertex {v}", vertex=v)
    uf = UnionFind(g.vertex_count)
    for u, v in g.edges:
        if (s[u] > 0) == (s[v] > 0):
            uf.union(u, v)
    return uf.components
