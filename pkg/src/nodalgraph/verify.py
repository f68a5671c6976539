"""Seeded ensembles, interlacing audits, genericity perturbation and a finite-difference oracle."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .discrete import assemble_hamiltonian, check_genericity, eigen_decompose, verify_bounds
from .eigensolver import lowest_eigenvalues
from .errors import (
    IdenticallyZeroEdge,
    InputError,
    NodalGraphError,
    PerturbationExhausted,
    ZeroAtVertex,
)
from .graph import Graph, build_graph, spanning_cut_set
from .metric.graph import DIRICHLET, NEUMANN, ROBIN, MetricGraph
from .metric.nodal import cut_residual, cut_to_tree, metric_nodal_count
from .metric.spectrum import MetricEigenpair, eigenfunction, find_eigenvalues

DISCRETE = "discrete"
METRIC = "metric"
JITTER_START = 1e-6
JITTER_CAP = 1e-3
JITTER_TRIES = 5
METRIC_GAP_RTOL = 1e-8


@dataclass(frozen=True)
class EnsembleConfig:
    model: str = DISCRETE
    instance_count: int = 10
    vertex_range: tuple[int, int] = (4, 12)
    ell_range: tuple[int, int] = (0, 5)
    potential_law: tuple[float, float] = (-1.0, 1.0)
    length_law: tuple[float, float] = (0.5, 1.5)
    eigenvalue_budget: int = 20
    seed: int = 1

    def __post_init__(self):
        if self.model not in (DISCRETE, METRIC):
            raise InputError(f"unknown model {self.model!r}")
        if self.instance_count < 0:
            raise InputError("instance_count must be non-negative")
        for name in ("vertex_range", "ell_range", "potential_law", "length_law"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise InputError(f"{name} is empty: [{lo}, {hi}]")
        if self.vertex_range[0] < 2:
            raise InputError("graphs need at least two vertices")
        if self.ell_range[0] < 0:
            raise InputError("ell_range must be non-negative")
        if self.length_law[0] <= 0:
            raise InputError("lengths must be positive")
        if self.eigenvalue_budget < 1:
            raise InputError("eigenvalue_budget must be positive")
        if not 0 <= self.seed < 2**64:
            raise InputError("seed must be a 64-bit unsigned integer")
        if max_cycle_dimension(self.vertex_range[1]) < self.ell_range[0]:
            raise InputError(f"no graph with at most {self.vertex_range[1]} vertices has ℓ ≥ {self.ell_range[0]}")

    @classmethod
    def from_dict(cls, data: dict) -> "EnsembleConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(data)
        try:
            for name in ("vertex_range", "ell_range"):
                if name in kwargs:
                    kwargs[name] = tuple(int(x) for x in kwargs[name])
            for name in ("potential_law", "length_law"):
                if name in kwargs:
                    kwargs[name] = tuple(float(x) for x in kwargs[name])
            for name in ("instance_count", "eigenvalue_budget", "seed"):
                if name in kwargs:
                    kwargs[name] = int(kwargs[name])
            for name in ("vertex_range", "ell_range", "potential_law", "length_law"):
                if name in kwargs and len(kwargs[name]) != 2:
                    raise InputError(f"{name} needs two entries")
        except (TypeError, ValueError) as exc:
            raise InputError(f"bad config value: {exc}") from exc
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class VerificationRecord:
    instance: int
    n: int
    lambda_: float
    ell: int
    nu: int | None
    generic: bool
    lower_ok: bool | None
    upper_ok: bool | None
    m: int | None = None
    flags: tuple[str, ...] = ()

    @property
    def violation(self) -> bool:
        return self.generic and not (self.lower_ok and self.upper_ok)


def max_cycle_dimension(vertex_count: int) -> int:
    return vertex_count * (vertex_count - 1) // 2 - (vertex_count - 1)


def instance_rng(seed: int, instance: int) -> np.random.Generator:
    """Counter-based stream for one instance, independent of evaluation order."""
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, instance, 0]))


def random_graph(rng: np.random.Generator, vertex_count: int, ell: int) -> Graph:
    """Random parent attachment followed by ``ell`` extra edges between non-adjacent pairs."""
    edges = [(int(rng.integers(0, v)), v) for v in range(1, vertex_count)]
    present = {frozenset(e) for e in edges}
    free = [
        (a, b)
        for a in range(vertex_count)
        for b in range(a + 1, vertex_count)
        if frozenset((a, b)) not in present
    ]
    if ell > len(free):
        raise InputError(f"cannot add {ell} edges to a tree on {vertex_count} vertices")
    picks = rng.choice(len(free), size=ell, replace=False) if ell else []
    edges += [free[int(i)] for i in sorted(picks)]
    return build_graph(vertex_count, edges)


def _draw_shape(cfg: EnsembleConfig, rng) -> tuple[int, int]:
    lo, hi = cfg.vertex_range
    while True:
        v = int(rng.integers(lo, hi + 1))
        top = min(cfg.ell_range[1], max_cycle_dimension(v))
        if top >= cfg.ell_range[0]:
            return v, int(rng.integers(cfg.ell_range[0], top + 1))


def discrete_instance(cfg: EnsembleConfig, instance: int) -> tuple[Graph, np.ndarray]:
    rng = instance_rng(cfg.seed, instance)
    v, ell = _draw_shape(cfg, rng)
    g = random_graph(rng, v, ell)
    q = rng.uniform(*cfg.potential_law, size=v)
    return g, q


def metric_instance(cfg: EnsembleConfig, instance: int) -> MetricGraph:
    """Random metric graph with Kirchhoff (Neumann at leaves) conditions.

    The potential is one constant per edge drawn from ``potential_law``.
    """
    rng = instance_rng(cfg.seed, instance)
    v, ell = _draw_shape(cfg, rng)
    g = random_graph(rng, v, ell)
    lengths = rng.uniform(*cfg.length_law, size=len(g.edges))
    qs = rng.uniform(*cfg.potential_law, size=len(g.edges))
    pots = tuple(((0.0, float(q)),) for q in qs)
    return MetricGraph(g, tuple(float(x) for x in lengths), (NEUMANN,) * v, pots)


def run_discrete_ensemble(cfg: EnsembleConfig) -> list[VerificationRecord]:
    if cfg.model != DISCRETE:
        raise InputError("configuration is not for the discrete model")
    records = []
    for i in range(cfg.instance_count):
        g, q = discrete_instance(cfg, i)
        for r in verify_bounds(g, q):
            flags = () if r.generic else ("nongeneric",)
            records.append(
                VerificationRecord(i, r.n, r.lambda_, r.ell, r.nu, r.generic, r.lower_ok, r.upper_ok, None, flags)
            )
    return records


@dataclass(frozen=True)
class MetricPairStatus:
    pair: MetricEigenpair
    generic: bool
    nu: int | None
    reason: str = ""


def metric_pair_status(mg: MetricGraph, pairs: Sequence[MetricEigenpair], n: int) -> MetricPairStatus:
    """Eigenfunction, genericity and nodal count of pair ``n`` (1-based)."""
    pair = pairs[n - 1]
    lam = pair.lambda_
    gap = METRIC_GAP_RTOL * max(1.0, abs(lam))
    neighbours = [pairs[i].lambda_ for i in (n - 2, n) if 0 <= i < len(pairs)]
    if pair.multiplicity > 1 or any(abs(lam - mu) <= gap for mu in neighbours):
        return MetricPairStatus(pair, False, None, "multiple")
    pair = eigenfunction(mg, pair)
    try:
        nu = metric_nodal_count(mg, pair)
    except ZeroAtVertex:
        return MetricPairStatus(pair, False, metric_nodal_count(mg, pair, True), "vertex-zero")
    except IdenticallyZeroEdge:
        return MetricPairStatus(pair, False, metric_nodal_count(mg, pair, True), "edge-zero")
    return MetricPairStatus(pair, True, nu)


def run_metric_ensemble(cfg: EnsembleConfig, cut: bool = False) -> list[VerificationRecord]:
    """Bound checks on the lowest ``eigenvalue_budget`` pairs of each instance.

    With ``cut`` the first generic pair of each graph with cycles is also cut to
    a tree and its index there is stored in ``m``.
    """
    if cfg.model != METRIC:
        raise InputError("configuration is not for the metric model")
    records = []
    for i in range(cfg.instance_count):
        mg = metric_instance(cfg, i)
        ell = mg.ell
        try:
            pairs = find_eigenvalues(mg, count=cfg.eigenvalue_budget)
        except NodalGraphError as exc:
            records.append(VerificationRecord(i, 0, math.nan, ell, None, False, None, None, None,
                                              (f"failure:{type(exc).__name__}",)))
            continue
        cut_done = not cut or ell == 0
        for n in range(1, len(pairs) + 1):
            st = metric_pair_status(mg, pairs, n)
            m = None
            flags = () if st.generic else ("nongeneric", st.reason)
            if st.generic and not cut_done:
                exp = cut_experiment(mg, st.pair)
                m = exp.m
                cut_done = True
                if not exp.ok:
                    flags += ("cut-audit-failed",)
            if st.generic:
                rec = VerificationRecord(i, n, st.pair.lambda_, ell, st.nu, True,
                                         st.nu >= n - ell, st.nu <= n, m, flags)
            else:
                rec = VerificationRecord(i, n, st.pair.lambda_, ell, st.nu, False, None, None, m, flags)
            records.append(rec)
    return records


@dataclass(frozen=True)
class AuditResult:
    ok: bool
    margin: float


AUDIT_SLACK = -1e-9


def interlacing_audit(base: Sequence[float], other: Sequence[float], mode: str = "rank_one",
                      slack: float = AUDIT_SLACK) -> AuditResult:
    """Most negative slack of an interlacing relation between two spectra.

    ``rank_one``: λ_n ≤ ρ_n ≤ λ_{n+1} for the spectrum ρ under one linear constraint.
    ``cut``: μ_k ≤ λ_k (a cut that lowers the spectrum, including discrete α > 0).
    ``cut_shifted``: μ_{k-1} ≤ λ_k (discrete cuts with α < 0).
    """
    lam = np.asarray(base, dtype=float)
    mu = np.asarray(other, dtype=float)
    margins: list[float] = []
    if mode == "rank_one":
        for n in range(min(len(mu), len(lam))):
            margins.append(mu[n] - lam[n])
            if n + 1 < len(lam):
                margins.append(lam[n + 1] - mu[n])
    elif mode == "cut":
        k = min(len(lam), len(mu))
        margins.extend(lam[:k] - mu[:k])
    elif mode == "cut_shifted":
        k = min(len(lam) - 1, len(mu))
        margins.extend(lam[1 : k + 1] - mu[:k])
    else:
        raise InputError(f"unknown audit mode {mode!r}")
    worst = float(min(margins)) if margins else 0.0
    scale = max(1.0, float(np.max(np.abs(lam))) if lam.size else 1.0)
    return AuditResult(worst >= slack * scale, worst)


def constrained_spectrum(a: np.ndarray, constraint: np.ndarray) -> np.ndarray:
    """Eigenvalues of the quadratic form of ``a`` restricted to ``constraint``⊥."""
    c = np.asarray(constraint, dtype=float)
    n = len(c)
    basis, _ = np.linalg.qr(np.column_stack([c, np.eye(n)[:, : n - 1]]))
    q = basis[:, 1:]
    return np.sort(eigen_decompose(q.T @ a @ q).eigenvalues)


@dataclass(frozen=True)
class CutExperiment:
    n: int
    m: int
    antisymmetry: float
    residual: float
    interlacing: AuditResult

    @property
    def ok(self) -> bool:
        return (
            self.antisymmetry <= 1e-9
            and self.residual <= 1e-9
            and self.interlacing.ok
            and self.m >= self.n
        )


def cut_experiment(
    mg: MetricGraph, pair: MetricEigenpair, cut_edges=None, base: Sequence[float] | None = None
) -> CutExperiment:
    """Cut ``mg`` to a tree through ``pair``; find λ in the tree spectrum and audit μ_k ≤ λ_k.

    The audit runs over ``base`` (eigenvalues of ``mg``) when given, otherwise
    over the eigenvalues up to λ.
    """
    if pair.solutions is None:
        pair = eigenfunction(mg, pair)
    cuts = spanning_cut_set(mg.graph) if cut_edges is None else cut_edges
    result = cut_to_tree(mg, pair, cuts)
    if base is None:
        top = pair.lambda_ + 1e-6 * max(1.0, abs(pair.lambda_))
        base = [p.lambda_ for p in find_eigenvalues(mg, lambda_max=top)]
    else:
        top = max(max(base), pair.lambda_)
        top += 1e-6 * max(1.0, abs(top))
    tree = [p.lambda_ for p in find_eigenvalues(result.tree, lambda_max=top)]
    tol = 1e-8 * max(1.0, abs(pair.lambda_))
    matches = [i + 1 for i, mu in enumerate(tree) if abs(mu - pair.lambda_) <= tol]
    m = matches[0] if matches else 0
    return CutExperiment(pair.n, m, result.worst_antisymmetry, cut_residual(result),
                         interlacing_audit(base, tree, "cut"))


@dataclass(frozen=True)
class PerturbationLog:
    magnitude: float
    retries: int


def metric_generic_up_to(mg: MetricGraph, n: int) -> bool:
    pairs = find_eigenvalues(mg, count=n + 1)
    return all(metric_pair_status(mg, pairs, k).generic for k in range(1, min(n, len(pairs)) + 1))


def discrete_generic_up_to(g: Graph, q, n: int) -> bool:
    s = eigen_decompose(assemble_hamiltonian(g, q))
    return all(check_genericity(s, k).generic for k in range(1, n + 1))


def perturb_to_generic(instance, n: int, rng: np.random.Generator):
    """Jitter an instance until every pair up to ``n`` is generic.

    ``instance`` is ``(graph, q)`` for the discrete model (additive jitter of q)
    or a ``MetricGraph`` (multiplicative jitter of the lengths). Magnitudes run
    1e-6, 1e-5, ... up to 1e-3 with a few redraws each.
    """
    if isinstance(instance, MetricGraph):
        check = lambda inst: metric_generic_up_to(inst, n)

        def jitter(eps):
            factors = 1.0 + eps * rng.uniform(-1.0, 1.0, size=len(instance.lengths))
            return instance.with_lengths([x * f for x, f in zip(instance.lengths, factors)])
    else:
        g, q = instance
        q = np.asarray(q, dtype=float)
        check = lambda inst: discrete_generic_up_to(inst[0], inst[1], n)

        def jitter(eps):
            return g, q + eps * rng.uniform(-1.0, 1.0, size=q.shape)

    if check(instance):
        return instance, PerturbationLog(0.0, 0)
    retries = 0
    eps = JITTER_START
    while eps <= JITTER_CAP * (1 + 1e-9):
        for _ in range(JITTER_TRIES):
            retries += 1
            candidate = jitter(eps)
            if check(candidate):
                return candidate, PerturbationLog(eps, retries)
        eps *= 10.0
    raise PerturbationExhausted(f"no generic perturbation up to magnitude {JITTER_CAP} ({retries} tries)")


def fd_matrices(mg: MetricGraph, mesh_size: float, refinement: int = 0):
    """Stiffness and lumped mass of the second-order scheme, with node bookkeeping.

    Edge ``e`` gets ``ceil(L_e / mesh_size) * 2**refinement`` equal cells, so a
    unit increase of ``refinement`` halves every cell exactly.
    """
    if mesh_size > min(mg.lengths) / 8 * (1 + 1e-12):
        raise InputError(f"mesh_size {mesh_size} exceeds min edge length / 8")
    nodes = mg.vertex_count
    segments = []  # (i, j, h, q)
    for e, (u, v) in enumerate(mg.edges):
        length = mg.lengths[e]
        cells = math.ceil(length / mesh_size - 1e-9) * 2**refinement
        h = length / cells
        ids = [u] + list(range(nodes, nodes + cells - 1)) + [v]
        nodes += cells - 1
        bounds = mg.piece_bounds(e)
        for c in range(cells):
            mid = (c + 0.5) * h
            q = next(q for s, t, q in bounds if mid < t or t == length)
            segments.append((ids[c], ids[c + 1], h, q))
    k = np.zeros((nodes, nodes))
    mass = np.zeros(nodes)
    for i, j, h, q in segments:
        k[i, i] += 1.0 / h + q * h / 2
        k[j, j] += 1.0 / h + q * h / 2
        k[i, j] -= 1.0 / h
        k[j, i] -= 1.0 / h
        mass[i] += h / 2
        mass[j] += h / 2
    keep = np.ones(nodes, dtype=bool)
    for v, cond in enumerate(mg.conditions):
        if cond.kind == DIRICHLET:
            keep[v] = False
        elif cond.kind == ROBIN:
            k[v, v] += cond.tan_alpha
    return k[np.ix_(keep, keep)], mass[keep]


def fd_oracle(mg: MetricGraph, mesh_size: float, count: int = 10, refinement: int = 0) -> np.ndarray:
    """Lowest ``count`` eigenvalues of the finite-difference operator, ascending."""
    k, mass = fd_matrices(mg, mesh_size, refinement)
    w = 1.0 / np.sqrt(mass)
    a = k * w[:, None] * w[None, :]
    return lowest_eigenvalues(a, count)
