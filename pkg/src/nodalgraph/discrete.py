"""Discrete Schrödinger operators ``(Hψ)_u = -Σ_{v~u} ψ_v + q_u ψ_u`` on graphs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .eigensolver import jacobi_eigh
from .errors import DisconnectedGraph, DisconnectingCut, VanishingEndpoint, ZeroSign
from .graph import Graph, UnionFind, build_graph, cycle_dimension, sign_components

GAP_RTOL = 1e-8
VANISH_RTOL = 1e-8


def gap_tolerance(scale: float, rtol: float = GAP_RTOL) -> float:
    return rtol * max(1.0, scale)


def vanish_tolerance(psi: np.ndarray, rtol: float = VANISH_RTOL) -> float:
    return rtol * float(np.max(np.abs(psi)))


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues with unit eigenvectors stored as rows."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual_bound: float
    scale: float  # Frobenius norm of the decomposed matrix

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def pair(self, n: int) -> tuple[float, np.ndarray]:
        """1-based access to ``(λ_n, ψ⁽ⁿ⁾)``."""
        return float(self.eigenvalues[n - 1]), self.eigenvectors[n - 1]


@dataclass(frozen=True)
class GenericityReport:
    n: int
    simple: bool
    nonvanishing: bool

    @property
    def generic(self) -> bool:
        return self.simple and self.nonvanishing


@dataclass(frozen=True)
class NodalReport:
    n: int
    lambda_: float
    nu: int
    ell: int
    generic: bool
    lower_ok: bool | None  # None when the pair is non-generic
    upper_ok: bool | None


def potential_array(g: Graph, q) -> np.ndarray:
    if q is None:
        return np.zeros(g.vertex_count)
    if isinstance(q, dict):
        return np.array([float(q[v]) for v in range(g.vertex_count)])
    q = np.asarray(q, dtype=float)
    if q.shape != (g.vertex_count,):
        raise ValueError(f"potential has shape {q.shape}, expected ({g.vertex_count},)")
    return q


def assemble_hamiltonian(g: Graph, q) -> np.ndarray:
    h = np.diag(potential_array(g, q))
    for u, v in g.edges:
        h[u, v] = h[v, u] = -1.0
    return h


def quadratic_form(g: Graph, q, psi) -> float:
    """Σ_jk H_jk ψ_j ψ_k evaluated edge by edge."""
    psi = np.asarray(psi, dtype=float)
    value = float(np.dot(potential_array(g, q), psi * psi))
    for u, v in g.edges:
        value -= 2.0 * psi[u] * psi[v]
    return value


def _canonical_sign(vec: np.ndarray) -> np.ndarray:
    tol = vanish_tolerance(vec)
    for x in vec:
        if abs(x) > tol:
            return vec if x > 0 else -vec
    return vec


def eigen_decompose(h: np.ndarray) -> Spectrum:
    h = np.asarray(h, dtype=float)
    if not np.allclose(h, h.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(h).max())):
        raise ValueError("matrix is not symmetric")
    values, vectors = jacobi_eigh(h)
    order = np.argsort(values, kind="stable")
    values = values[order]
    rows = np.array([_canonical_sign(vectors[:, i] / np.linalg.norm(vectors[:, i])) for i in order])
    residual = max(
        (float(np.linalg.norm(h @ rows[i] - values[i] * rows[i])) for i in range(len(values))),
        default=0.0,
    )
    return Spectrum(values, rows, residual, float(np.linalg.norm(h)))


def check_genericity(
    s: Spectrum, n: int, gap_rtol: float = GAP_RTOL, vanish_rtol: float = VANISH_RTOL
) -> GenericityReport:
    lam, psi = s.pair(n)
    gap = gap_tolerance(s.scale, gap_rtol)
    neighbours = [s.eigenvalues[i] for i in (n - 2, n) if 0 <= i < len(s)]
    simple = all(abs(lam - mu) > gap for mu in neighbours)
    nonvanishing = bool(np.min(np.abs(psi)) > vanish_tolerance(psi, vanish_rtol))
    return GenericityReport(n, simple, nonvanishing)


def nodal_count(g: Graph, psi, vanish_tol: float | None = None) -> int:
    psi = np.asarray(psi, dtype=float)
    tol = vanish_tolerance(psi) if vanish_tol is None else vanish_tol
    small = np.flatnonzero(np.abs(psi) <= tol)
    if small.size:
        v = int(small[0])
        raise ZeroSign(f"vector vanishes at vertex {v} (|ψ| = {abs(psi[v]):.3g})", vertex=v)
    return sign_components(g, np.sign(psi).astype(int))


def support_nodal_count(g: Graph, psi, vanish_rtol: float = VANISH_RTOL) -> int:
    """Strong nodal domains over the vertices where ``psi`` does not vanish."""
    psi = np.asarray(psi, dtype=float)
    alive = np.abs(psi) > vanish_tolerance(psi, vanish_rtol)
    uf = UnionFind(g.vertex_count)
    for u, v in g.edges:
        if alive[u] and alive[v] and (psi[u] > 0) == (psi[v] > 0):
            uf.union(u, v)
    return len({uf.find(v) for v in range(g.vertex_count) if alive[v]})


def verify_bounds(
    g: Graph, q, gap_rtol: float = GAP_RTOL, vanish_rtol: float = VANISH_RTOL
) -> list[NodalReport]:
    """One report per eigenpair; bounds are checked only on generic pairs."""
    ell = cycle_dimension(g)
    spectrum = eigen_decompose(assemble_hamiltonian(g, q))
    reports = []
    for n in range(1, len(spectrum) + 1):
        lam, psi = spectrum.pair(n)
        gen = check_genericity(spectrum, n, gap_rtol, vanish_rtol)
        if gen.generic:
            nu = nodal_count(g, psi, vanish_tolerance(psi, vanish_rtol))
            reports.append(NodalReport(n, lam, nu, ell, True, nu >= n - ell, nu <= n))
        else:
            nu = support_nodal_count(g, psi, vanish_rtol)
            reports.append(NodalReport(n, lam, nu, ell, False, None, None))
    return reports


def cut_with_surgery(
    g: Graph, q, phi, edge: Sequence[int]
) -> tuple[Graph, np.ndarray, float]:
    """Delete ``edge`` and shift the potential so that ``phi`` stays an eigenvector.

    Returns the cut graph, the new potential and ``alpha = phi[v2] / phi[v1]``.
    """
    v1, v2 = int(edge[0]), int(edge[1])
    if not g.has_edge(v1, v2):
        raise DisconnectingCut(f"({v1}, {v2}) is not an edge")
    phi = np.asarray(phi, dtype=float)
    tol = vanish_tolerance(phi)
    for v in (v1, v2):
        if abs(phi[v]) <= tol:
            raise VanishingEndpoint(f"eigenvector vanishes at cut endpoint {v}")
    try:
        gamma = g.without_edges([(v1, v2)])
    except DisconnectedGraph as exc:
        raise DisconnectingCut(f"removing ({v1}, {v2}) disconnects the graph") from exc
    alpha = phi[v2] / phi[v1]
    p = potential_array(g, q).copy()
    p[v1] -= alpha
    p[v2] -= 1.0 / alpha
    return gamma, p, float(alpha)


def path_graph(n: int) -> Graph:
    return build_graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return build_graph(n, [(i, (i + 1) % n) for i in range(n)])
