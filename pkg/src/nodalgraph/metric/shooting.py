"""Shooting on metric trees: the logarithmic derivative R = ψ'/ψ swept leaves-to-root.

Along an edge R obeys ``R' = q - λ - R²``; it is carried here in homogeneous
form as the state ``(ψ, ψ')`` so that poles of R (zeros of ψ) cost nothing.
At an internal vertex the outgoing R is the sum of the incoming ones. The
number of zeros of the shooting solution, together with the position of the
root value relative to the root condition, counts the eigenvalues below λ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import InputError, ScanResolutionFailure
from ..graph import root_tree
from .edge import piece_zeros, step
from .graph import DIRICHLET, MetricGraph

ENDPOINT_RTOL = 1e-12


@dataclass(frozen=True)
class ShootingSweep:
    lambda_: float
    root: int
    value: float  # ψ at the root
    slope: float  # ψ' at the root, pointing out of the tree
    interior_zeros: int

    @property
    def root_value(self) -> float:
        """R(λ, r) = ψ'/ψ at the root; ``inf`` when ψ vanishes there."""
        return self.slope / self.value if self.value != 0.0 else math.inf


def _leaf_state(cond) -> tuple[float, float]:
    if cond.kind == DIRICHLET:
        return 0.0, 1.0
    return math.cos(cond.alpha), math.sin(cond.alpha)


def _directed_pieces(mg: MetricGraph, e: int, forward: bool):
    bounds = mg.piece_bounds(e)
    if forward:
        return [(t - s, q) for s, t, q in bounds]
    return [(t - s, q) for s, t, q in reversed(bounds)]


def _transport(y, p, lam, pieces) -> tuple[float, float, int]:
    zeros = 0
    length = sum(w for w, _ in pieces)
    guard = ENDPOINT_RTOL * length
    x = 0.0
    for i, (w, q) in enumerate(pieces):
        mu = lam - q
        for z in piece_zeros(y, p, mu, w):
            if guard < x + z < length - guard:
                zeros += 1
        y, p = step(y, p, mu, w)
        x += w
        if i + 1 < len(pieces) and y == 0.0:
            zeros += 1
        norm = math.hypot(y, p)
        if norm > 0:
            y, p = y / norm, p / norm
    return y, p, zeros


def shooting_sweep(mt: MetricGraph, lam: float, root: int) -> ShootingSweep:
    """Shoot from every leaf other than ``root`` towards ``root``."""
    if mt.graph.degree(root) != 1:
        raise InputError(f"root {root} is not a boundary vertex")
    t = root_tree(mt.graph, root)
    state: dict[int, tuple[float, float]] = {}
    zeros = 0
    for v in t.topo_order:
        if v == root:
            break
        children = t.children[v]
        if not children:
            y, p = _leaf_state(mt.conditions[v])
        else:
            # R_out = Σ R_in, written without dividing by the incoming values
            y, p = 1.0, 0.0
            for w in children:
                yw, pw = state[w]
                y, p = y * yw, p * yw + y * pw
                norm = math.hypot(y, p)
                if norm > 0:
                    y, p = y / norm, p / norm
        parent = t.parent[v]
        e = mt.graph.edge_index(v, parent)
        forward = mt.edges[e][0] == v
        y, p, nz = _transport(y, p, lam, _directed_pieces(mt, e, forward))
        zeros += nz
        state[v] = (y, p)
    (child,) = t.children[root]
    y, p = state[child]
    return ShootingSweep(float(lam), root, y, p, zeros)


def shooting_count(mt: MetricGraph, lam: float, root: int) -> int:
    """Eigenvalues strictly below ``lam``.

    For a Dirichlet root this is the number of zeros of the shooting solution;
    otherwise one more when ``R(λ, r) < -tan α_r``, i.e. when the root value has
    already passed the root condition ``R + tan α_r = 0`` on the current branch.
    """
    s = shooting_sweep(mt, lam, root)
    cond = mt.conditions[root]
    if cond.kind == DIRICHLET:
        return s.interior_zeros
    g = s.slope * math.cos(cond.alpha) + s.value * math.sin(cond.alpha)
    # R + tan α < 0  ⇔  g / (ψ cos α) < 0
    return s.interior_zeros + (1 if g * s.value < 0 else 0)


def root_condition(mt: MetricGraph, lam: float, root: int) -> float:
    """``ψ' cos α + ψ sin α`` at the root; zero exactly at eigenvalues."""
    s = shooting_sweep(mt, lam, root)
    cond = mt.conditions[root]
    if cond.kind == DIRICHLET:
        return s.value
    return s.slope * math.cos(cond.alpha) + s.value * math.sin(cond.alpha)


def _bisect(mt, root, a, b, na, nb, out):
    if na == nb:
        return
    tol = 1e-14 * max(1.0, abs(a), abs(b))
    if b - a <= tol:
        out.extend([0.5 * (a + b)] * (nb - na))
        return
    mid = 0.5 * (a + b)
    nm = shooting_count(mt, mid, root)
    if not na <= nm <= nb:
        raise ScanResolutionFailure(f"shooting count not monotone on [{a}, {b}]")
    _bisect(mt, root, a, mid, na, nm, out)
    _bisect(mt, root, mid, b, nm, nb, out)


def shooting_eigenvalues(
    mt: MetricGraph, lambda_max: float, root: int | None = None, floor: float | None = None
) -> list[float]:
    """Eigenvalues of a metric tree up to ``lambda_max`` by bisection on the zero count."""
    from .spectrum import spectral_floor

    if root is None:
        root = next(v for v in range(mt.vertex_count) if mt.graph.degree(v) == 1)
    lo = spectral_floor(mt) if floor is None else floor
    if lambda_max <= lo:
        return []
    out: list[float] = []
    _bisect(mt, root, lo, lambda_max, shooting_count(mt, lo, root),
            shooting_count(mt, lambda_max, root), out)
    return sorted(out)
