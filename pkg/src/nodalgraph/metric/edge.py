"""Solutions of ``-ψ'' + q ψ = λ ψ`` on one edge with piecewise-constant ``q``.

On a piece with ``μ = λ - q`` the fundamental pair is

    C(t) = cos(√μ t),  S(t) = sin(√μ t)/√μ      (μ > 0)
    C(t) = cosh(√-μ t), S(t) = sinh(√-μ t)/√-μ  (μ < 0)
    C(t) = 1,           S(t) = t                (μ = 0)

with ``C' = -μ S`` and ``S' = C``, so one formula covers all three regimes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import IdenticallyZeroEdge

ENDPOINT_RTOL = 1e-12


def fundamental(mu: float, t: float) -> tuple[float, float]:
    if mu > 0:
        w = math.sqrt(mu)
        return math.cos(w * t), math.sin(w * t) / w
    if mu < 0:
        k = math.sqrt(-mu)
        return math.cosh(k * t), math.sinh(k * t) / k
    return 1.0, t


def step(y: float, p: float, mu: float, t: float) -> tuple[float, float]:
    c, s = fundamental(mu, t)
    return c * y + s * p, -mu * s * y + c * p


def _integral_s_squared(mu: float, t: float, c: float, s: float) -> float:
    """∫_0^t S² dt, with a series where (t - S C)/(2μ) would cancel."""
    x = mu * t * t
    if abs(x) < 0.5:
        total, term = 0.0, t**3 / 3.0
        for k in range(1, 12):
            total += term
            term *= -4.0 * x / ((2 * k + 2) * (2 * k + 3))
        return total
    return (t - s * c) / (2.0 * mu)


def piece_zeros(y: float, p: float, mu: float, t: float) -> list[float]:
    """Zeros of ``C y + S p`` in the open interval (0, t)."""
    if y == 0.0 and p == 0.0:
        return []
    out: list[float] = []
    if mu > 0:
        w = math.sqrt(mu)
        phase = math.atan2(y, p / w)  # C y + S p = A sin(w s + phase)
        n = math.floor(phase / math.pi) + 1
        while True:
            z = (n * math.pi - phase) / w
            if z >= t:
                break
            if z > 0:
                out.append(z)
            n += 1
    elif mu < 0:
        k = math.sqrt(-mu)
        if p != 0.0:
            r = -y * k / p
            if 0.0 < r < 1.0:
                z = math.atanh(r) / k
                if 0 < z < t:
                    out.append(z)
    else:
        if p != 0.0:
            z = -y / p
            if 0 < z < t:
                out.append(z)
    return out


@dataclass(frozen=True)
class EdgeSolution:
    """A solution on one directed edge, given by its value and slope at ``x = 0``."""

    edge: tuple[int, int]
    value_at_start: float
    slope_at_start: float
    lambda_: float
    length: float
    pieces: tuple[tuple[float, float], ...] = ((0.0, 0.0),)

    @property
    def k(self) -> float:
        return math.sqrt(self.lambda_) if self.lambda_ > 0 else 0.0

    def _bounds(self):
        starts = [s for s, _ in self.pieces]
        ends = starts[1:] + [self.length]
        return [(s, e, q) for (s, q), e in zip(self.pieces, ends)]

    def states(self) -> list[tuple[float, float, float, float, float]]:
        """(start, end, μ, ψ(start), ψ'(start)) for each piece."""
        y, p = self.value_at_start, self.slope_at_start
        out = []
        for s, e, q in self._bounds():
            mu = self.lambda_ - q
            out.append((s, e, mu, y, p))
            y, p = step(y, p, mu, e - s)
        return out

    def evaluate(self, x: float) -> tuple[float, float]:
        """(ψ(x), ψ'(x))."""
        for s, e, mu, y, p in self.states():
            if x <= e or e == self.length:
                return step(y, p, mu, x - s)
        raise AssertionError("unreachable")

    def evaluate_many(self, xs) -> np.ndarray:
        return np.array([self.evaluate(float(x))[0] for x in xs])

    def at_end(self) -> tuple[float, float]:
        return self.evaluate(self.length)

    def reversed(self) -> "EdgeSolution":
        y, p = self.at_end()
        starts = [s for s, _ in self.pieces]
        ends = starts[1:] + [self.length]
        pieces = tuple((self.length - e, q) for (_, q), e in reversed(list(zip(self.pieces, ends))))
        return EdgeSolution(
            (self.edge[1], self.edge[0]), y, -p, self.lambda_, self.length, pieces
        )

    def scaled(self, factor: float) -> "EdgeSolution":
        return EdgeSolution(
            self.edge,
            self.value_at_start * factor,
            self.slope_at_start * factor,
            self.lambda_,
            self.length,
            self.pieces,
        )

    def amplitude(self) -> float:
        """A scale for |ψ| on the edge, used to detect identically-zero edges."""
        best = 0.0
        for _, _, mu, y, p in self.states():
            w = math.sqrt(abs(mu)) if mu != 0 else 1.0
            best = max(best, math.hypot(y, p / max(w, 1.0)))
        y, p = self.at_end()
        return max(best, abs(y))

    def norm_squared(self) -> float:
        total = 0.0
        for s, e, mu, y, p in self.states():
            t = e - s
            c, sv = fundamental(mu, t)
            total += (
                y * y * 0.5 * (t + sv * c)
                + y * p * sv * sv
                + p * p * _integral_s_squared(mu, t, c, sv)
            )
        return total

    def energy(self) -> float:
        """∫ (ψ'² + q ψ²) over the edge."""
        y_end, p_end = self.at_end()
        boundary = y_end * p_end - self.value_at_start * self.slope_at_start
        return boundary + self.lambda_ * self.norm_squared()

    def is_identically_zero(self, scale: float, rtol: float = 1e-8) -> bool:
        return self.amplitude() <= rtol * scale


def edge_zeros(sol: EdgeSolution, length: float | None = None, scale: float | None = None) -> list[float]:
    """Interior zeros of the solution, ascending; endpoint zeros are left to the vertices."""
    length = sol.length if length is None else length
    amp = sol.amplitude()
    if amp == 0.0 or (scale is not None and sol.is_identically_zero(scale)):
        raise IdenticallyZeroEdge(f"solution vanishes identically on edge {sol.edge}")
    zeros: list[float] = []
    states = sol.states()
    for i, (s, e, mu, y, p) in enumerate(states):
        zs = piece_zeros(y, p, mu, e - s)
        zeros.extend(s + z for z in zs)
        if i + 1 < len(states):
            y_end, _ = step(y, p, mu, e - s)
            if y_end == 0.0:
                zeros.append(e)
    guard = ENDPOINT_RTOL * length
    return [z for z in zeros if guard < z < length - guard]
