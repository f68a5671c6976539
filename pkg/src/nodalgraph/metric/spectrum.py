"""Eigenvalues and eigenfunctions of Schrödinger operators on metric graphs.

Every edge carries the fundamental pair (c, s) with c(0)=1, c'(0)=0, s(0)=0,
s'(0)=1, so a function on the graph is given by two numbers per edge, its
value and slope at the edge start. The vertex conditions form a square
2|E| × 2|E| linear system whose determinant is an entire function of λ
vanishing exactly at the eigenvalues.

Eigenvalues are bracketed with an eigenvalue counting function built from the
Dirichlet-to-Neumann matrix at the vertices: the number of eigenvalues below λ
equals the number of Dirichlet eigenvalues of the decoupled edges below λ plus
the number of negative eigenvalues of that matrix. Counting never misses a
root, including repeated ones; isolated simple roots are then polished on
the determinant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from ..errors import DegenerateChoice, ScanResolutionFailure
from .edge import EdgeSolution, fundamental, piece_zeros, step
from .graph import DIRICHLET, ROBIN, MetricGraph

NULLITY_RTOL = 1e-8


@dataclass(frozen=True)
class MetricEigenpair:
    n: int
    lambda_: float
    multiplicity: int = 1
    solutions: tuple[EdgeSolution, ...] | None = None

    @property
    def k(self) -> float:
        return math.sqrt(self.lambda_) if self.lambda_ > 0 else 0.0

    @property
    def multiplicity_flag(self) -> bool:
        return self.multiplicity > 1

    def directed(self, u: int, v: int) -> EdgeSolution:
        """The solution on edge (u, v) with the coordinate starting at ``u``."""
        for sol in self.solutions or ():
            if sol.edge == (u, v):
                return sol
            if sol.edge == (v, u):
                return sol.reversed()
        raise KeyError((u, v))


def transfer(mg: MetricGraph, e: int, lam: float) -> np.ndarray:
    """Maps (ψ(0), ψ'(0)) to (ψ(L), ψ'(L)) along edge ``e``."""
    t = np.eye(2)
    for s, end, q in mg.piece_bounds(e):
        c, sv = fundamental(lam - q, end - s)
        t = np.array([[c, sv], [-(lam - q) * sv, c]]) @ t
    return t


def _column_scale(lam: float) -> float:
    return 1.0 / math.sqrt(1.0 + abs(lam))


def secular_matrix(mg: MetricGraph, lam: float) -> np.ndarray:
    """Vertex-condition matrix acting on (ψ_e(0), ψ'_e(0)·w) per edge, w = √(1+|λ|)."""
    m = len(mg.edges)
    rows = []
    w = _column_scale(lam)
    transfers = [transfer(mg, e, lam) for e in range(m)]

    def value_row(e, at_start):
        r = np.zeros(2 * m)
        if at_start:
            r[2 * e] = 1.0
        else:
            r[2 * e], r[2 * e + 1] = transfers[e][0, 0], transfers[e][0, 1] * w
        return r

    def inward_row(e, at_start):
        # derivative pointing from the vertex into the edge
        r = np.zeros(2 * m)
        if at_start:
            r[2 * e + 1] = w
        else:
            r[2 * e], r[2 * e + 1] = -transfers[e][1, 0], -transfers[e][1, 1] * w
        return r

    for v in range(mg.vertex_count):
        inc = mg.incidences(v)
        cond = mg.conditions[v]
        if cond.kind == DIRICHLET:
            rows.append(value_row(*inc[0]))
        elif cond.kind == ROBIN:
            e, at = inc[0]
            rows.append(math.cos(cond.alpha) * inward_row(e, at) - math.sin(cond.alpha) * value_row(e, at))
        else:
            first = value_row(*inc[0])
            for e, at in inc[1:]:
                rows.append(value_row(e, at) - first)
            rows.append(sum(inward_row(e, at) for e, at in inc))
    return np.array(rows)


def secular_value(mg: MetricGraph, lam: float) -> float:
    return float(np.linalg.det(secular_matrix(mg, lam)))


class _OnDirichletPole(Exception):
    pass


def dirichlet_count(mg: MetricGraph, e: int, lam: float) -> int:
    """Dirichlet eigenvalues of edge ``e`` below ``lam`` (zeros of s in (0, L))."""
    y, p, total = 0.0, 1.0, 0
    bounds = mg.piece_bounds(e)
    for i, (s, end, q) in enumerate(bounds):
        total += len(piece_zeros(y, p, lam - q, end - s))
        y, p = step(y, p, lam - q, end - s)
        if i + 1 < len(bounds) and y == 0.0:
            total += 1
    return total


def dtn_matrix(mg: MetricGraph, lam: float) -> tuple[np.ndarray, list[int]]:
    """Dirichlet-to-Neumann matrix on the non-Dirichlet vertices."""
    free = [v for v in range(mg.vertex_count) if mg.conditions[v].kind != DIRICHLET]
    index = {v: i for i, v in enumerate(free)}
    lam_mat = np.zeros((len(free), len(free)))
    for e, (u, v) in enumerate(mg.edges):
        t = transfer(mg, e, lam)
        c, s, sp = t[0, 0], t[0, 1], t[1, 1]
        if abs(s) < 1e-15 * max(1.0, abs(c), abs(sp)) * mg.lengths[e]:
            raise _OnDirichletPole
        if u in index:
            lam_mat[index[u], index[u]] += c / s
        if v in index:
            lam_mat[index[v], index[v]] += sp / s
        if u in index and v in index:
            lam_mat[index[u], index[v]] -= 1.0 / s
            lam_mat[index[v], index[u]] -= 1.0 / s
    for v in free:
        cond = mg.conditions[v]
        if cond.kind == ROBIN:
            lam_mat[index[v], index[v]] += math.tan(cond.alpha)
    return lam_mat, free


def count_below(mg: MetricGraph, lam: float, nudge: float = 1e-9) -> int:
    """Number of eigenvalues strictly below ``lam`` (``lam`` itself nudged off poles)."""
    x = lam
    for attempt in range(20):
        try:
            mat, _ = dtn_matrix(mg, x)
        except _OnDirichletPole:
            x = lam + nudge * max(1.0, abs(lam)) * (attempt + 1) * (-1) ** attempt
            continue
        nd = sum(dirichlet_count(mg, e, x) for e in range(len(mg.edges)))
        neg = int(np.sum(np.linalg.eigvalsh(mat) < 0)) if mat.size else 0
        return nd + neg
    raise ScanResolutionFailure(f"counting function undefined near λ={lam}")


def spectral_floor(mg: MetricGraph) -> float:
    """A λ with no eigenvalue below it."""
    tans = [abs(c.tan_alpha) for c in mg.conditions if c.kind == ROBIN]
    guess = mg.min_potential() - 1.0 - (max(tans) ** 2 if tans else 0.0) * 4.0
    if tans:
        guess -= max(tans) * len(mg.edges) / min(mg.lengths)
    for _ in range(60):
        if count_below(mg, guess) == 0:
            return guess
        guess -= 2.0 * (abs(guess) + 1.0)
    raise ScanResolutionFailure("could not find a lower bound for the spectrum")


def _tolerance(lam: float) -> float:
    return 1e-13 * max(1.0, abs(lam))


def _locate(mg, a, b, na, nb, out):
    if na == nb:
        return
    if nb - na == 1:
        fa, fb = secular_value(mg, a), secular_value(mg, b)
        if fa * fb < 0:
            root = brentq(lambda x: secular_value(mg, x), a, b, xtol=_tolerance(b), rtol=1e-15,
                          maxiter=200)
            out.append((root, 1))
            return
    if b - a <= _tolerance(b):
        out.append((0.5 * (a + b), nb - na))
        return
    mid = 0.5 * (a + b)
    try:
        nm = count_below(mg, mid, nudge=min(1e-9, 1e-3 * (b - a) / max(1.0, abs(mid))))
    except ScanResolutionFailure:
        if b - a > 1e4 * _tolerance(b):
            raise
        # pinned to a Dirichlet pole of the edges: the bracket is already tight
        out.append((mid, nb - na))
        return
    if not na <= nm <= nb:
        raise ScanResolutionFailure(f"eigenvalue count is not monotone on [{a}, {b}]")
    _locate(mg, a, mid, na, nm, out)
    _locate(mg, mid, b, nm, nb, out)


def find_eigenvalues(
    mg: MetricGraph, lambda_max: float | None = None, count: int | None = None
) -> list[MetricEigenpair]:
    """Eigenvalues up to ``lambda_max`` or the lowest ``count`` ones, ascending.

    Repeated eigenvalues appear once per multiplicity with consecutive indices.
    """
    if lambda_max is None and count is None:
        raise ValueError("give lambda_max or count")
    floor = spectral_floor(mg)
    if lambda_max is None:
        hi = max(1.0, floor + 1.0)
        while count_below(mg, hi) < count:
            hi = 2.0 * hi + 1.0
    else:
        hi = float(lambda_max)
    if hi <= floor:
        return []
    roots: list[tuple[float, int]] = []
    n_hi = count_below(mg, hi)
    _locate(mg, floor, hi, 0, n_hi, roots)
    roots.sort()
    pairs = []
    n = 1
    for lam, mult in roots:
        for _ in range(mult):
            pairs.append(MetricEigenpair(n, lam, mult))
            n += 1
    if lambda_max is None:
        pairs = pairs[:count]
    return pairs


def nullity(mg: MetricGraph, lam: float) -> int:
    mat = _normalized(secular_matrix(mg, lam))
    sv = np.linalg.svd(mat, compute_uv=False)
    return int(np.sum(sv <= NULLITY_RTOL * sv[0]))


def _normalized(mat: np.ndarray) -> np.ndarray:
    return mat / np.linalg.norm(mat, axis=1, keepdims=True)


def eigenfunction(mg: MetricGraph, pair: MetricEigenpair, basis_index: int | None = None) -> MetricEigenpair:
    """Fill ``pair.solutions`` with a unit-norm eigenfunction.

    For repeated eigenvalues a ``basis_index`` in ``range(multiplicity)`` picks
    one vector of the null space; without it ``DegenerateChoice`` is raised.
    """
    if pair.multiplicity > 1 and basis_index is None:
        raise DegenerateChoice(
            f"λ={pair.lambda_} has multiplicity {pair.multiplicity}; choose a basis_index"
        )
    lam = pair.lambda_
    mat = _normalized(secular_matrix(mg, lam))
    _, _, vt = np.linalg.svd(mat)
    vec = vt[-pair.multiplicity + (basis_index or 0)]
    w = _column_scale(lam)
    sols = []
    for e, (u, v) in enumerate(mg.edges):
        sols.append(
            EdgeSolution((u, v), vec[2 * e], vec[2 * e + 1] * w, lam, mg.lengths[e], mg.potentials[e])
        )
    norm = math.sqrt(sum(s.norm_squared() for s in sols))
    sign = _sign_convention(mg, sols)
    sols = [s.scaled(sign / norm) for s in sols]
    return replace(pair, solutions=tuple(sols))


def _sign_convention(mg: MetricGraph, sols) -> float:
    values = vertex_values(mg, sols)
    ref = max(abs(x) for x in values)
    for x in values:
        if abs(x) > 1e-6 * ref:
            return 1.0 if x > 0 else -1.0
    for s in sols:
        for x in (s.value_at_start, s.slope_at_start):
            if x != 0.0:
                return 1.0 if x > 0 else -1.0
    return 1.0


def vertex_values(mg: MetricGraph, sols) -> list[float]:
    """ψ(v), averaged over the incident edge ends."""
    out = []
    for v in range(mg.vertex_count):
        vals = [
            sols[e].value_at_start if at else sols[e].at_end()[0] for e, at in mg.incidences(v)
        ]
        out.append(float(np.mean(vals)))
    return out


def vertex_residual(mg: MetricGraph, sols) -> float:
    """Largest violation of continuity and the vertex conditions."""
    worst = 0.0
    for v in range(mg.vertex_count):
        vals, ders = [], []
        for e, at in mg.incidences(v):
            if at:
                vals.append(sols[e].value_at_start)
                ders.append(sols[e].slope_at_start)
            else:
                y, p = sols[e].at_end()
                vals.append(y)
                ders.append(-p)
        cond = mg.conditions[v]
        worst = max(worst, max(abs(x - vals[0]) for x in vals))
        if cond.kind == DIRICHLET:
            worst = max(worst, abs(vals[0]))
        elif cond.kind == ROBIN:
            worst = max(worst, abs(ders[0] * math.cos(cond.alpha) - vals[0] * math.sin(cond.alpha)))
        else:
            worst = max(worst, abs(sum(ders)))
    return worst


def weyl_deviation(mg: MetricGraph, pairs: list[MetricEigenpair], k_values) -> float:
    """max |#{k_n ≤ K} - (ΣL) K / π| over the given K."""
    ks = [p.k if p.lambda_ > 0 else 0.0 for p in pairs]
    worst = 0.0
    for big_k in k_values:
        counted = sum(1 for k in ks if k <= big_k)
        worst = max(worst, abs(counted - mg.total_length * big_k / math.pi))
    return worst
