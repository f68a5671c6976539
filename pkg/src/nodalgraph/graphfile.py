"""Plain-text graph files.

    graph 3                 # discrete graph on vertices 1..3
    e 1 2
    e 2 3
    v 2 0.5                 # potential at vertex 2 (default 0)

    metric 2
    e 1 2 3.14 0 1.5        # length, then potential values on equal-width pieces
    e 1 2 3.14 0@0 1.5@2.0  # or value@start pairs
    v 2 bc=robin:0.3        # kirchhoff | dirichlet | robin:<alpha>

Labels are 1-indexed in files and 0-indexed in memory. Blank lines and text
after ``#`` are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InputError, NodalGraphError
from .graph import Graph, build_graph
from .metric.graph import DIRICHLET, KIRCHHOFF, ROBIN, MetricGraph, VertexCondition


class GraphFileError(InputError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass(frozen=True)
class DiscreteGraph:
    graph: Graph
    q: tuple[float, ...]


def _float(token: str, line: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise GraphFileError(f"expected a number, got {token!r}", line) from None


def _label(token: str, size: int, line: int) -> int:
    try:
        v = int(token)
    except ValueError:
        raise GraphFileError(f"expected a vertex label, got {token!r}", line) from None
    if not 1 <= v <= size:
        raise GraphFileError(f"vertex {v} outside 1..{size}", line)
    return v - 1


def _condition(token: str, line: int) -> VertexCondition:
    if not token.startswith("bc="):
        raise GraphFileError(f"expected bc=..., got {token!r}", line)
    kind, _, arg = token[3:].partition(":")
    if kind in (KIRCHHOFF, DIRICHLET) and not arg:
        return VertexCondition(kind)
    if kind == ROBIN and arg:
        return VertexCondition.robin(_float(arg, line))
    raise GraphFileError(f"unknown boundary condition {token!r}", line)


def _pieces(tokens: list[str], length: float, line: int) -> tuple[tuple[float, float], ...]:
    if not tokens:
        return ((0.0, 0.0),)
    if all("@" in t for t in tokens):
        pieces = []
        for t in tokens:
            value, start = t.split("@", 1)
            pieces.append((_float(start, line), _float(value, line)))
        return tuple(pieces)
    if any("@" in t for t in tokens):
        raise GraphFileError("mix of plain and value@start potentials", line)
    width = length / len(tokens)
    return tuple((i * width, _float(t, line)) for i, t in enumerate(tokens))


def parse_graph_file(text: str) -> DiscreteGraph | MetricGraph:
    header = None
    size = 0
    edges, lengths, pots = [], [], []
    q: dict[int, float] = {}
    conds: dict[int, VertexCondition] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        key = tokens[0]
        if header is None:
            if key not in ("graph", "metric") or len(tokens) != 2:
                raise GraphFileError("file must start with 'graph <V>' or 'metric <V>'", number)
            header = key
            try:
                size = int(tokens[1])
            except ValueError:
                raise GraphFileError(f"bad vertex count {tokens[1]!r}", number) from None
            if size < 1:
                raise GraphFileError("vertex count must be positive", number)
            continue
        if key == "e":
            if len(tokens) < 3:
                raise GraphFileError("edge needs two endpoints", number)
            u, v = _label(tokens[1], size, number), _label(tokens[2], size, number)
            edges.append((u, v))
            if header == "graph":
                if len(tokens) != 3:
                    raise GraphFileError("discrete edges take no length or potential", number)
                continue
            if len(tokens) < 4:
                raise GraphFileError("metric edge needs a length", number)
            length = _float(tokens[3], number)
            if not length > 0:
                raise GraphFileError(f"edge length must be positive, got {length}", number)
            lengths.append(length)
            pots.append(_pieces(tokens[4:], length, number))
        elif key == "v":
            if len(tokens) != 3:
                raise GraphFileError("vertex line is 'v <u> <value>'", number)
            u = _label(tokens[1], size, number)
            if header == "graph":
                q[u] = _float(tokens[2], number)
            else:
                conds[u] = _condition(tokens[2], number)
        else:
            raise GraphFileError(f"unknown directive {key!r}", number)
    if header is None:
        raise GraphFileError("empty graph file")
    try:
        if header == "graph":
            g = build_graph(size, edges)
            return DiscreteGraph(g, tuple(q.get(v, 0.0) for v in range(size)))
        g = build_graph(size, edges)
        cond_list = tuple(conds.get(v, VertexCondition()) for v in range(size))
        return MetricGraph(g, tuple(lengths), cond_list, tuple(pots))
    except GraphFileError:
        raise
    except NodalGraphError as exc:
        raise GraphFileError(str(exc)) from exc


def read_graph_file(path) -> DiscreteGraph | MetricGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph_file(fh.read())


def _condition_token(c: VertexCondition) -> str:
    if c.kind == ROBIN:
        return f"bc=robin:{c.alpha!r}"
    return f"bc={c.kind}"


def format_graph_file(doc: DiscreteGraph | MetricGraph) -> str:
    """Canonical text: edges in stored order, then non-default vertex lines."""
    lines = []
    if isinstance(doc, DiscreteGraph):
        lines.append(f"graph {doc.graph.vertex_count}")
        lines += [f"e {u + 1} {v + 1}" for u, v in doc.graph.edges]
        lines += [f"v {v + 1} {x!r}" for v, x in enumerate(doc.q) if x != 0.0]
    else:
        lines.append(f"metric {doc.vertex_count}")
        for e, (u, v) in enumerate(doc.edges):
            parts = [f"e {u + 1} {v + 1} {doc.lengths[e]!r}"]
            pieces = doc.potentials[e]
            if len(pieces) == 1:
                if pieces[0][1] != 0.0:
                    parts.append(repr(pieces[0][1]))
            else:
                parts += [f"{q!r}@{s!r}" for s, q in pieces]
            lines.append(" ".join(parts))
        lines += [
            f"v {v + 1} {_condition_token(c)}"
            for v, c in enumerate(doc.conditions)
            if c != VertexCondition()
        ]
    return "\n".join(lines) + "\n"
