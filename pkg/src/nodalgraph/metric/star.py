"""Dirichlet stars and the construction where the lower nodal bound is lost.

On a star with Dirichlet ends, k² is an eigenvalue with nonzero central value
exactly when ``Σ_j cot(k L_j) = 0``. With ``L_1 = 1``, ``L_2 = 1/m`` and the
remaining lengths incommensurate and close to 1, ``k = mπ`` is a pole of two
cotangents at once; the eigenfunction there lives on edges 1 and 2 only and
vanishes at the centre.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from ..errors import InputError, PoleProximity
from .graph import MetricGraph, star
from .nodal import metric_nodal_count
from .spectrum import eigenfunction, find_eigenvalues

POLE_TOL = 1e-12
K_TOL = 1e-9


def star_secular(lengths: Sequence[float], k: float) -> float:
    """Σ_j cot(k L_j)."""
    total = 0.0
    for length in lengths:
        s = math.sin(k * length)
        if abs(s) < POLE_TOL:
            raise PoleProximity(f"k={k} is a pole of cot(k·{length})")
        total += math.cos(k * length) / s
    return total


def primes(count: int) -> list[int]:
    out: list[int] = []
    n = 2
    while len(out) < count:
        if all(n % p for p in out if p * p <= n):
            out.append(n)
        n += 1
    return out


def counterexample_lengths(m: int, N: int) -> list[float]:
    return [1.0, 1.0 / m] + [1.0 + math.sqrt(p) / 100.0 for p in primes(N - 2)]


def build_star_counterexample(m: int, N: int) -> MetricGraph:
    if m < 2:
        raise InputError(f"m must be at least 2, got {m}")
    if N < 3:
        raise InputError(f"N must be at least 3, got {N}")
    return star(counterexample_lengths(m, N))


def commensurate_pairs(
    lengths: Sequence[float], max_coefficient: int = 100, tol: float = 1e-9,
    exempt: Sequence[tuple[int, int]] = ((0, 1),),
) -> list[tuple[int, int, int, int]]:
    """Pairs (i, j) with a L_i = b L_j for integers 1 ≤ a, b ≤ max_coefficient.

    Returns ``(i, j, a, b)`` for each offending pair outside ``exempt``.
    """
    found = []
    for i in range(len(lengths)):
        for j in range(i + 1, len(lengths)):
            if (i, j) in exempt:
                continue
            ratio = lengths[i] / lengths[j]
            for a in range(1, max_coefficient + 1):
                b = round(a * ratio)
                if 1 <= b <= max_coefficient and abs(a * lengths[i] - b * lengths[j]) < tol:
                    found.append((i, j, a, b))
                    break
    return found


@dataclass(frozen=True)
class CounterexampleReport:
    m: int
    N: int
    k: float
    index: int
    claimed_index: int
    nu: int
    vanishes_at_centre: bool
    support_edges: tuple[int, ...]

    @property
    def preceding(self) -> int:
        return self.index - 1


def analyse_counterexample(m: int, N: int) -> CounterexampleReport:
    """Locate k = mπ in the spectrum and count the nodal domains of its eigenfunction."""
    mg = build_star_counterexample(m, N)
    target = m * math.pi
    pairs = find_eigenvalues(mg, lambda_max=(target + 0.5) ** 2)
    hits = [p for p in pairs if abs(p.k - target) <= K_TOL]
    if not hits:
        raise InputError(f"no eigenvalue found at k = {m}π")
    pair = eigenfunction(mg, hits[0], basis_index=0 if hits[0].multiplicity > 1 else None)
    sols = pair.solutions
    scale = max(s.amplitude() for s in sols)
    support = tuple(e for e, s in enumerate(sols) if not s.is_identically_zero(scale))
    centre = max(abs(s.at_end()[0]) for s in sols)
    return CounterexampleReport(
        m=m,
        N=N,
        k=hits[0].k,
        index=hits[0].n,
        claimed_index=(m - 1) * (N - 1) + 2,
        nu=metric_nodal_count(mg, pair, allow_nongeneric=True),
        vanishes_at_centre=bool(centre <= 1e-8 * scale),
        support_edges=support,
    )
