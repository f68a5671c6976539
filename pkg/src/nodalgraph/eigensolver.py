"""Dense symmetric eigensolvers: Jacobi rotations, and tridiagonal bisection.

Rotations are scheduled in round-robin (tournament) order, so each round
applies ``n/2`` disjoint plane rotations at once. A full round-robin cycle
touches every off-diagonal pair exactly once, which makes one cycle a sweep
of the classical cyclic method. The working matrix is kept permuted so that
the pairs of the current round sit in adjacent rows and columns; a round is
then a handful of whole-array operations.
"""

from __future__ import annotations

import numpy as np

from .errors import ConvergenceFailure

MAX_SWEEPS = 60


def _tournament(m: int) -> list[np.ndarray]:
    """Slot layouts for ``m`` players; pairs are (layout[2i], layout[2i+1])."""
    players = list(range(m))
    layouts = []
    for _ in range(m - 1):
        top = players[: m // 2]
        bottom = players[m // 2 :][::-1]
        layouts.append(np.array([x for pair in zip(top, bottom) for x in pair]))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return layouts


def _rotation(a4: np.ndarray, negligible: float) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(a4.shape[0])
    app = a4[idx, 0, idx, 0]
    aqq = a4[idx, 1, idx, 1]
    apq = a4[idx, 0, idx, 1]
    active = np.abs(apq) > negligible
    denom = np.where(active, 2.0 * apq, 1.0)
    theta = (aqq - app) / denom
    big = np.abs(theta) > 1e150
    safe = np.where(big, 1.0, theta)
    t = np.where(
        big,
        0.5 / np.where(big, theta, 1.0),
        np.sign(safe) / (np.abs(safe) + np.sqrt(safe * safe + 1.0)),
    )
    t = np.where(theta == 0.0, 1.0, t)
    t = np.where(active, t, 0.0)
    c = 1.0 / np.sqrt(t * t + 1.0)
    return c, t * c


def jacobi_eigh(
    a: np.ndarray, tol: float = 1e-14, vectors: bool = True
) -> tuple[np.ndarray, np.ndarray | None]:
    """Eigenvalues and orthonormal eigenvectors (as columns) of a symmetric matrix.

    The result is unsorted. Raises ``ConvergenceFailure`` after ``MAX_SWEEPS``.
    """
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    if n == 1:
        return a.diagonal().copy(), np.eye(1) if vectors else None
    norm = np.linalg.norm(a)
    if norm == 0.0:
        return np.zeros(n), np.eye(n) if vectors else None
    m = n + (n % 2)
    if m != n:
        # a dummy row/column that never couples to anything
        a = np.pad(a, ((0, 1), (0, 1)))
    h = m // 2
    layouts = _tournament(m)
    # order[k] = original index held in slot k
    order = np.arange(m)
    v = np.eye(m) if vectors else None
    idx = np.arange(h)
    threshold = tol * norm
    negligible = 1e-18 * norm
    for _ in range(MAX_SWEEPS):
        off = np.sqrt(2.0 * np.sum(np.triu(a, 1) ** 2))
        if off <= threshold:
            break
        for layout in layouts:
            where = np.empty(m, dtype=int)
            where[order] = np.arange(m)
            rel = where[layout]
            a = a[np.ix_(rel, rel)]
            order = layout
            if v is not None:
                v = v[:, rel]
            a4 = a.reshape(h, 2, h, 2)
            c, s = _rotation(a4, negligible)
            x0 = a4[:, :, :, 0].copy()
            x1 = a4[:, :, :, 1].copy()
            a4[:, :, :, 0] = c * x0 - s * x1
            a4[:, :, :, 1] = s * x0 + c * x1
            cr, sr = c[:, None, None], s[:, None, None]
            y0 = a4[:, 0, :, :].copy()
            y1 = a4[:, 1, :, :].copy()
            a4[:, 0, :, :] = cr * y0 - sr * y1
            a4[:, 1, :, :] = sr * y0 + cr * y1
            a4[idx, 0, idx, 1] = 0.0
            a4[idx, 1, idx, 0] = 0.0
            if v is not None:
                v3 = v.reshape(m, h, 2)
                z0 = v3[:, :, 0].copy()
                z1 = v3[:, :, 1].copy()
                v3[:, :, 0] = c * z0 - s * z1
                v3[:, :, 1] = s * z0 + c * z1
    else:
        raise ConvergenceFailure(f"Jacobi iteration did not converge in {MAX_SWEEPS} sweeps")
    where = np.empty(m, dtype=int)
    where[order] = np.arange(m)
    values = a.diagonal()[where][:n].copy()
    if v is None:
        return values, None
    return values, v[:, where][:n, :n].copy()


def tridiagonalize(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Householder reduction of a symmetric matrix to (diagonal, off-diagonal)."""
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    for k in range(n - 2):
        x = a[k + 1 :, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        v = x.copy()
        v[0] += np.copysign(alpha, x[0])
        v /= np.linalg.norm(v)
        sub = a[k + 1 :, k + 1 :]
        w = 2.0 * (sub @ v)
        w -= (v @ w) * v
        sub -= np.outer(v, w) + np.outer(w, v)
        a[k + 1 :, k] = 0.0
        a[k, k + 1 :] = 0.0
        a[k + 1, k] = a[k, k + 1] = -np.copysign(alpha, x[0])
    return a.diagonal().copy(), a.diagonal(1).copy()


def sturm_count(diag: np.ndarray, off: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Number of eigenvalues of the tridiagonal matrix strictly below each ``x``."""
    x = np.asarray(x, dtype=float)
    tiny = np.finfo(float).tiny ** 0.5
    q = diag[0] - x
    count = (q < 0).astype(int)
    for i in range(1, len(diag)):
        q = np.where(q == 0.0, tiny, q)
        q = diag[i] - x - off[i - 1] ** 2 / q
        count += q < 0
    return count


def lowest_eigenvalues(a: np.ndarray, count: int, tol: float = 1e-13) -> np.ndarray:
    """The ``count`` smallest eigenvalues of a symmetric matrix, ascending."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    count = min(count, n)
    if n == 1:
        return a.diagonal().copy()
    d, e = tridiagonalize(a)
    radius = np.abs(e)
    left = d - np.concatenate(([0.0], radius)) - np.concatenate((radius, [0.0]))
    right = d + np.concatenate(([0.0], radius)) + np.concatenate((radius, [0.0]))
    lo = np.full(count, left.min())
    hi = np.full(count, right.max())
    target = np.arange(count)
    scale = max(abs(lo[0]), abs(hi[0]), 1.0)
    while np.max(hi - lo) > tol * scale:
        mid = 0.5 * (lo + hi)
        below = sturm_count(d, e, mid) > target
        hi = np.where(below, mid, hi)
        lo = np.where(below, lo, mid)
    return 0.5 * (lo + hi)
