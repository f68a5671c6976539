"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 numerical failure, 4 model mismatch.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import __version__
from .discrete import (
    GAP_RTOL,
    VANISH_RTOL,
    assemble_hamiltonian,
    check_genericity,
    eigen_decompose,
    verify_bounds,
)
from .errors import InputError, ModelMismatch, NodalGraphError, NonGenericSweep
from .graph import cycle_dimension, root_tree
from .graphfile import DiscreteGraph, read_graph_file
from .metric.graph import MetricGraph
from .metric.spectrum import find_eigenvalues
from .metric.star import analyse_counterexample
from .report import Report
from .riccati import (
    POLE,
    gershgorin_interval,
    locate_eigenvalues,
    nodal_count_via_riccati,
    riccati_sweep,
)
from .verify import EnsembleConfig, metric_pair_status, run_discrete_ensemble, run_metric_ensemble

SEED_ENV = "NODALGRAPH_SEED"
DEFAULT_COUNT = 20


def _header(args, **extra) -> dict:
    head = {"command": args.command, "version": __version__}
    head.update(extra)
    return head


def _load(args, want: str | None = None):
    doc = read_graph_file(args.file)
    model = args.model if getattr(args, "model", None) not in (None, "auto") else (
        "metric" if isinstance(doc, MetricGraph) else "discrete"
    )
    if want is not None:
        model = want
    if model == "metric" and not isinstance(doc, MetricGraph):
        raise ModelMismatch(f"{args.file} describes a discrete graph")
    if model == "discrete" and not isinstance(doc, DiscreteGraph):
        raise ModelMismatch(f"{args.file} describes a metric graph")
    return doc


def _metric_pairs(mg: MetricGraph, args):
    if args.kmax is not None:
        # eigenvalues with k < kmax
        return find_eigenvalues(mg, lambda_max=args.kmax**2 * (1 - 1e-12))
    return find_eigenvalues(mg, count=args.count or DEFAULT_COUNT)


def cmd_spectrum(args) -> Report:
    doc = _load(args)
    if isinstance(doc, DiscreteGraph):
        s = eigen_decompose(assemble_hamiltonian(doc.graph, doc.q))
        rep = Report(_header(args, model="discrete", gap_rtol=args.gap_rtol, vanish_rtol=args.vanish_rtol),
                     ["n", "lambda", "simple", "nonvanishing", "generic"])
        for n in range(1, len(s) + 1):
            gen = check_genericity(s, n, args.gap_rtol, args.vanish_rtol)
            rep.add(n=n, **{"lambda": float(s.eigenvalues[n - 1])}, simple=gen.simple,
                    nonvanishing=gen.nonvanishing, generic=gen.generic)
        rep.summary["residual_bound"] = s.residual_bound
        return rep
    pairs = _metric_pairs(doc, args)
    rep = Report(_header(args, model="metric"), ["n", "lambda", "k", "multiplicity"])
    for p in pairs:
        rep.add(n=p.n, **{"lambda": p.lambda_}, k=p.k, multiplicity=p.multiplicity)
    rep.summary["eigenvalues"] = len(pairs)
    return rep


NODAL_COLUMNS = ["n", "lambda", "nu", "ell", "generic", "lower_ok", "upper_ok", "flags"]


def cmd_nodal(args) -> Report:
    doc = _load(args)
    if isinstance(doc, DiscreteGraph):
        rep = Report(_header(args, model="discrete", gap_rtol=args.gap_rtol, vanish_rtol=args.vanish_rtol),
                     NODAL_COLUMNS)
        for r in verify_bounds(doc.graph, doc.q, args.gap_rtol, args.vanish_rtol):
            rep.add(n=r.n, **{"lambda": r.lambda_}, nu=r.nu, ell=r.ell, generic=r.generic,
                    lower_ok=r.lower_ok, upper_ok=r.upper_ok, flags=() if r.generic else ("nongeneric",))
    else:
        pairs = _metric_pairs(doc, args)
        ell = doc.ell
        rep = Report(_header(args, model="metric"), NODAL_COLUMNS)
        for n in range(1, len(pairs) + 1):
            st = metric_pair_status(doc, pairs, n)
            if st.generic:
                rep.add(n=n, **{"lambda": st.pair.lambda_}, nu=st.nu, ell=ell, generic=True,
                        lower_ok=st.nu >= n - ell, upper_ok=st.nu <= n, flags=())
            else:
                rep.add(n=n, **{"lambda": st.pair.lambda_}, nu=st.nu, ell=ell, generic=False,
                        lower_ok=None, upper_ok=None, flags=("nongeneric", st.reason))
    violations = sum(1 for r in rep.rows if r["generic"] and not (r["lower_ok"] and r["upper_ok"]))
    rep.summary["violations"] = violations
    return rep


def cmd_riccati(args) -> Report:
    doc = _load(args, want="discrete")
    g = doc.graph
    if cycle_dimension(g) != 0:
        raise ModelMismatch(f"graph has cycle dimension {cycle_dimension(g)}; riccati needs a tree")
    root = (args.root - 1) if args.root is not None else g.vertex_count - 1
    if not 0 <= root < g.vertex_count:
        raise InputError(f"root {args.root} outside 1..{g.vertex_count}")
    t = root_tree(g, root)
    if args.lambda_ is not None:
        s = riccati_sweep(t, doc.q, args.lambda_)
        rep = Report(_header(args, root=root + 1, **{"lambda": args.lambda_}), ["vertex", "parent", "R"])
        for v in t.topo_order:
            r = s.R[v]
            parent = t.parent.get(v)
            rep.add(vertex=v + 1, parent=None if parent is None else parent + 1,
                    R="pole" if r is POLE else float(r))
        rv = s.root_value
        rep.summary.update(
            root_value="pole" if rv is POLE else float(rv),
            n_less=s.n_less,
            n_leq=s.n_leq,
            valid=s.valid,
        )
        return rep
    if args.scan:
        a, b = args.scan
    else:
        lo, hi = gershgorin_interval(t, doc.q)
        a, b = lo - 1.0, hi + 1.0
    values = locate_eigenvalues(t, doc.q, (a, b))
    rep = Report(_header(args, root=root + 1, interval=(float(a), float(b))), ["n", "lambda", "nu", "flags"])
    for i, lam in enumerate(values, start=1):
        try:
            nu, flags = nodal_count_via_riccati(t, doc.q, lam), ()
        except NonGenericSweep:
            nu, flags = None, ("nongeneric",)
        rep.add(n=i, **{"lambda": lam}, nu=nu, flags=flags)
    rep.summary["eigenvalues"] = len(values)
    return rep


def cmd_counterexample(args) -> Report:
    r = analyse_counterexample(args.m, args.N)
    rep = Report(
        _header(args, m=args.m, N=args.N),
        ["index", "k", "k_over_pi", "nu", "claimed_index", "vanishes_at_centre", "support_edges"],
    )
    rep.add(index=r.index, k=r.k, k_over_pi=r.k / math.pi, nu=r.nu, claimed_index=r.claimed_index,
            vanishes_at_centre=r.vanishes_at_centre, support_edges=tuple(e + 1 for e in r.support_edges))
    rep.summary["assumption_violated"] = r.vanishes_at_centre
    return rep


ENSEMBLE_COLUMNS = ["instance", "n", "lambda", "ell", "nu", "generic", "lower_ok", "upper_ok", "m", "flags"]


def load_config(path) -> EnsembleConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError(f"{path}: config must be a JSON object")
    if "seed" not in data and os.environ.get(SEED_ENV):
        data["seed"] = os.environ[SEED_ENV]
    return EnsembleConfig.from_dict(data)


def cmd_ensemble(args) -> Report:
    cfg = load_config(args.config)
    if cfg.model == "discrete":
        records = run_discrete_ensemble(cfg)
    else:
        records = run_metric_ensemble(cfg, cut=args.cut)
    head = _header(args, seed=cfg.seed, gap_rtol=GAP_RTOL, vanish_rtol=VANISH_RTOL)
    head["config"] = json.dumps(cfg.to_dict(), sort_keys=True)
    rep = Report(head, ENSEMBLE_COLUMNS)
    for r in records:
        rep.add(instance=r.instance, n=r.n, **{"lambda": r.lambda_}, ell=r.ell, nu=r.nu, generic=r.generic,
                lower_ok=r.lower_ok, upper_ok=r.upper_ok, m=r.m, flags=r.flags)
    generic = sum(r.generic for r in records)
    rep.summary.update(
        instances=cfg.instance_count,
        records=len(records),
        generic=generic,
        nongeneric_rate=(len(records) - generic) / len(records) if records else 0.0,
        violations=sum(r.violation for r in records),
    )
    return rep


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nodalgraph", description="Nodal counts on discrete and metric graphs.")
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["text", "json"], default="text")
    common.add_argument("--output", "-o", help="write the report here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    def graph_command(name, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("file")
        p.add_argument("--model", choices=["auto", "discrete", "metric"], default="auto")
        p.add_argument("--gap-rtol", type=float, default=GAP_RTOL,
                       help=f"relative eigenvalue gap for simplicity (default {GAP_RTOL})")
        p.add_argument("--vanish-rtol", type=float, default=VANISH_RTOL,
                       help=f"relative size below which a vertex value counts as zero (default {VANISH_RTOL})")
        limit = p.add_mutually_exclusive_group()
        limit.add_argument("--kmax", type=float, help="metric: eigenvalues with k < KMAX")
        limit.add_argument("--count", type=int, help=f"metric: lowest COUNT eigenvalues (default {DEFAULT_COUNT})")
        return p

    graph_command("spectrum", "eigenvalues and genericity").set_defaults(func=cmd_spectrum)
    graph_command("nodal", "nodal counts and bound verdicts").set_defaults(func=cmd_nodal)

    p = sub.add_parser("riccati", parents=[common], help="Riccati variables on a discrete tree")
    p.add_argument("file")
    p.add_argument("--root", type=int, help="root vertex, 1-indexed (default: last vertex)")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--lambda", dest="lambda_", type=float, help="sweep at one spectral value")
    mode.add_argument("--scan", nargs=2, type=float, metavar=("A", "B"), help="locate eigenvalues in [A, B]")
    p.set_defaults(func=cmd_riccati)

    p = sub.add_parser("counterexample", parents=[common], help="the Dirichlet star with k = mπ")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("ensemble", parents=[common], help="seeded random ensemble from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--cut", action="store_true", help="metric: also cut one pair per graph to a tree")
    p.set_defaults(func=cmd_ensemble)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.func(args)
    except NodalGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = report.render(args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
