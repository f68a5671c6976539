"""Riccati variables ``R_v = ψ_parent / ψ_v`` on rooted discrete trees.

For a fixed spectral parameter the variables obey

    R_v = q_v - λ - Σ_{w child of v} 1 / R_w,

computed leaves first. The root value vanishes exactly at eigenvalues, and the
number of negative non-root variables at an eigenvalue is one less than the
nodal count of its eigenvector.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .discrete import potential_array
from .errors import BracketingFailure, InputError, NonGenericSweep
from .graph import RootedTree

POLE_TOL = 1e-12
GRID_DENSITY = 64  # scan points per unit of λ
MAX_REFINEMENTS = 3
GENERIC_RTOL = 1e-8
CROSS_CHECK_RTOLS = (1e-9, 1e-11, 1e-13)  # bracket half-widths tried around an eigenvalue


class _Pole:
    """Marker for a Riccati variable sitting on a pole (ψ_v = 0)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "POLE"


POLE = _Pole()


@dataclass(frozen=True)
class RiccatiSweep:
    lambda_: float
    R: Mapping[int, float | _Pole]
    root: int
    valid: bool

    @property
    def root_value(self) -> float | _Pole:
        return self.R[self.root]

    @property
    def n_less(self) -> int:
        """Negative finite variables strictly below the root."""
        return sum(
            1 for v, r in self.R.items() if v != self.root and r is not POLE and r < 0
        )

    @property
    def n_leq(self) -> int:
        return sum(1 for r in self.R.values() if r is not POLE and r < 0)


def riccati_sweep(t: RootedTree, q, lam: float) -> RiccatiSweep:
    qa = potential_array(t.graph, q)
    R: dict[int, float | _Pole] = {}
    valid = True
    for v in t.topo_order:
        total = 0.0
        pole = False
        for w in t.children[v]:
            rw = R[w]
            if rw is POLE:
                continue
            if abs(rw) < POLE_TOL:
                pole = True
                continue
            total += 1.0 / rw
        if pole:
            R[v] = POLE
            valid = False
        else:
            R[v] = qa[v] - lam - total
    return RiccatiSweep(float(lam), R, t.root, valid)


def riccati_table(t: RootedTree, q, lambdas: Sequence[float]) -> np.ndarray:
    """Riccati variables on a λ grid: rows follow ``lambdas``, columns vertices.

    Poles are reported as ``nan``.
    """
    qa = potential_array(t.graph, q)
    lam = np.asarray(lambdas, dtype=float)
    out = np.empty((lam.size, t.graph.vertex_count))
    with np.errstate(divide="ignore", invalid="ignore"):
        for v in t.topo_order:
            total = np.zeros_like(lam)
            for w in t.children[v]:
                rw = out[:, w]
                total += np.where(np.isnan(rw), 0.0, 1.0 / rw)
            col = qa[v] - lam - total
            bad = np.zeros(lam.shape, dtype=bool)
            for w in t.children[v]:
                bad |= np.abs(out[:, w]) < POLE_TOL
            out[:, v] = np.where(bad | ~np.isfinite(col), np.nan, col)
    return out


def gershgorin_interval(t: RootedTree, q) -> tuple[float, float]:
    qa = potential_array(t.graph, q)
    deg = np.array([t.graph.degree(v) for v in range(t.graph.vertex_count)])
    return float(np.min(qa - deg)), float(np.max(qa + deg))


def _scale(t: RootedTree, q) -> float:
    a, b = gershgorin_interval(t, q)
    return max(1.0, abs(a), abs(b))


def _count_below(t: RootedTree, q, x: float, width: float) -> int:
    """Eigenvalues strictly below ``x``: the number of negative pivots of H - x.

    A vanishing root pivot means ``x`` itself is an eigenvalue, which is not
    counted. A pole below the root leaves the pivots undefined, so ``x`` is
    nudged upwards within the caller's cell.
    """
    nudge = max(width * 1e-3, 4e-16 * max(1.0, abs(x)))
    for attempt in range(8):
        s = riccati_sweep(t, q, x)
        if s.valid and s.root_value is not POLE:
            return s.n_leq
        x += nudge * (attempt + 1)
    raise BracketingFailure(f"cannot evaluate the pivot count near λ={x}")


def _bisect_root(t: RootedTree, q, a: float, b: float, tol: float) -> float:
    while b - a > tol:
        mid = 0.5 * (a + b)
        r = riccati_sweep(t, q, mid).root_value
        if r is POLE:
            raise BracketingFailure(f"pole inside a zero bracket near λ={mid}")
        if r > 0:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def _bisect_count(t, q, a, b, na, nb, tol, out):
    """Recursive bisection on the pivot count; handles hidden and repeated roots."""
    if na == nb:
        return
    if b - a <= tol:
        out.extend([0.5 * (a + b)] * (nb - na))
        return
    mid = 0.5 * (a + b)
    try:
        nm = _count_below(t, q, mid, b - a)
    except BracketingFailure:
        if b - a > 1e4 * tol:
            raise
        out.extend([mid] * (nb - na))
        return
    if not na <= nm <= nb:
        raise BracketingFailure(f"pivot count not monotone on [{a}, {b}]")
    _bisect_count(t, q, a, mid, na, nm, tol, out)
    _bisect_count(t, q, mid, b, nm, nb, tol, out)


def locate_eigenvalues(t: RootedTree, q, interval: Sequence[float] | None = None) -> list[float]:
    """All eigenvalues of the tree Hamiltonian inside ``interval``, ascending.

    Simple zeros of the root variable are bracketed on a uniform scan and
    refined by bisection on its sign. Cells whose zero count (from the pivot
    inertia) does not match a clean ``+ → -`` bracket are rescanned on a finer
    grid, and finally resolved by bisection on the inertia count itself, which
    also catches eigenvalues hidden behind coinciding child zeros.
    """
    lo, hi = gershgorin_interval(t, q)
    if interval is None:
        interval = (lo - 1.0, hi + 1.0)
    a, b = float(interval[0]), float(interval[1])
    if not (np.isfinite(a) and np.isfinite(b)) or b < a:
        raise InputError(f"bad interval {interval}")
    scale = _scale(t, q)
    tol = 1e-14 * scale
    found: list[float] = []
    cells = [(a, b)]
    for level in range(MAX_REFINEMENTS + 1):
        pending = []
        for ca, cb in cells:
            n_points = max(2, int(np.ceil((cb - ca) * GRID_DENSITY * 4**level)) + 1)
            grid = np.linspace(ca, cb, n_points)
            counts = [_count_below(t, q, x, cb - ca) for x in grid]
            roots = [riccati_sweep(t, q, x).root_value for x in grid]
            for i in range(n_points - 1):
                jump = counts[i + 1] - counts[i]
                if jump < 0:
                    raise BracketingFailure(f"pivot count decreases on [{grid[i]}, {grid[i+1]}]")
                if jump == 0:
                    continue
                ra, rb = roots[i], roots[i + 1]
                clean = (
                    jump == 1
                    and ra is not POLE
                    and rb is not POLE
                    and ra > 0 > rb
                )
                if clean:
                    found.append(_bisect_root(t, q, grid[i], grid[i + 1], tol))
                else:
                    pending.append((grid[i], grid[i + 1], counts[i], counts[i + 1]))
        if not pending:
            break
        if level < MAX_REFINEMENTS:
            cells = [(x, y) for x, y, _, _ in pending]
    for x, y, nx, ny in pending if pending else []:
        _bisect_count(t, q, x, y, nx, ny, tol, found)
    return sorted(float(x) for x in found)


def _check_generic(sweep: RiccatiSweep, scale: float) -> None:
    if not sweep.valid:
        raise NonGenericSweep(f"a Riccati variable hits a pole at λ={sweep.lambda_}")
    for v, r in sweep.R.items():
        if v == sweep.root:
            continue
        if abs(r) < GENERIC_RTOL * scale or abs(r) > scale / GENERIC_RTOL:
            raise NonGenericSweep(
                f"R_{v} = {r:.3g} at λ={sweep.lambda_}: the eigenvector vanishes near vertex {v}"
            )


def nodal_count_via_riccati(t: RootedTree, q, lambda_n: float) -> int:
    """ν(λ_n) = N_r^< + 1, cross-checked on a bracket around ``lambda_n``.

    The bracket must contain exactly one eigenvalue (N_r^≤ steps by one) and no
    subtree pole (N_r^< is the same on both sides). It shrinks when a subtree
    eigenvalue sits very close to ``lambda_n``.
    """
    scale = _scale(t, q)
    sweep = riccati_sweep(t, q, lambda_n)
    _check_generic(sweep, scale)
    for rtol in CROSS_CHECK_RTOLS:
        eps = rtol * scale
        below = riccati_sweep(t, q, lambda_n - eps)
        above = riccati_sweep(t, q, lambda_n + eps)
        if not (below.valid and above.valid):
            continue
        if above.n_leq - below.n_leq == 1 and below.n_less == sweep.n_less == above.n_less:
            return sweep.n_less + 1
    if riccati_sweep(t, q, lambda_n + eps).n_leq == riccati_sweep(t, q, lambda_n - eps).n_leq:
        raise InputError(f"λ={lambda_n} is not an eigenvalue (R_r = {sweep.root_value})")
    raise NonGenericSweep(f"N_r^< is unstable around λ={lambda_n}")


def eigenvector_from_riccati(t: RootedTree, sweep: RiccatiSweep) -> np.ndarray:
    """Rebuild the unit eigenvector from the root downwards via ψ_v = ψ_u / R_v."""
    if t.graph.vertex_count < 2:
        raise InputError("tree must have at least two vertices")
    if not sweep.valid:
        raise NonGenericSweep(f"sweep at λ={sweep.lambda_} passes through a pole")
    psi = np.zeros(t.graph.vertex_count)
    psi[t.root] = 1.0
    for v in reversed(t.topo_order):
        if v == t.root:
            continue
        r = sweep.R[v]
        if r is POLE or abs(r) < POLE_TOL:
            raise NonGenericSweep(f"R_{v} vanishes at λ={sweep.lambda_}")
        psi[v] = psi[t.parent[v]] / r
    psi /= np.linalg.norm(psi)
    return psi
