"""Command-line entry point: ``cholcca <command> [options]``.

Commands: estimate, mle, order, fill, scca, bench, portfolio. Exit status is
0 on success, 2 for bad input or exceeded resource caps and 3 for numerical
failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .baselines import IterativeConfig, gipf_mle, ipf_mle
from .bench import build_cells, parse_bench_config, run_benchmark
from .cca import cca_estimate, resolve_ordering, verify_membership
from .cov import sample_covariance, threshold_graph
from .diagnostics import complexity_estimate, s_cca_diagnostics
from .errors import CCAError, InputError
from .graph import (
    DEFAULT_CLIQUE_CAP,
    apply_ordering,
    bandwidth,
    filled_graph,
    format_ordering,
    parse_graph,
    parse_ordering,
)
from .io import format_dense_csv, format_triplets, read_data_csv, read_matrix, read_text, write_text
from .portfolio import rolling_portfolio
from .simgen import parse_graph_kind

__all__ = ["main", "build_parser"]


# ---------------------------------------------------------------- output helpers

def _text_value(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ",".join(_text_value(x) for x in v)
    if isinstance(v, bool):
        return str(v).lower()
    return str(v)


def _render(report, fmt):
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    return "".join(f"{k}={_text_value(v)}\n" for k, v in report.items())


def _emit(args, report, extra_text=""):
    text = _render(report, args.format) + extra_text
    if getattr(args, "report", None):
        write_text(args.report, text)
    else:
        sys.stdout.write(text)


def _emit_timings(args, timings):
    if getattr(args, "timings", None):
        write_text(args.timings, _render(timings, args.format))


def _write_matrix(path, m, fmt, comment, graph):
    if fmt == "csv":
        write_text(path, format_dense_csv(m))
    else:
        write_text(path, format_triplets(m, comment=comment, pattern=graph.adjacency()))


# ---------------------------------------------------------------- input helpers

def _load_graph(args, s=None):
    """Graph from --graph / --graph-family / thresholding; returns (graph, extra report)."""
    sources = [x is not None for x in (args.graph, getattr(args, "graph_family", None),
                                       getattr(args, "select_threshold", None),
                                       getattr(args, "target_sparsity", None))]
    if sum(sources) != 1:
        raise InputError("give exactly one graph source: --graph, --graph-family, "
                         "--select-threshold or --target-sparsity")
    if args.graph is not None:
        return parse_graph(read_text(args.graph)), {}
    if getattr(args, "graph_family", None) is not None:
        return parse_graph_kind(args.graph_family), {}
    if s is None:
        raise InputError("threshold selection needs a covariance or data input")
    g, tau = threshold_graph(s, tau=args.select_threshold, target_sparsity=args.target_sparsity,
                             return_threshold=True)
    return g, {"threshold": tau}


def _load_cov(args):
    if (args.cov is None) == (args.data is None):
        raise InputError("give exactly one of --cov or --data")
    if args.cov is not None:
        return read_matrix(read_text(args.cov))
    return sample_covariance(read_data_csv(read_text(args.data)))


def _ordering_arg(args, g):
    o = args.ordering
    if o in ("rcm", "natural"):
        return resolve_ordering(g, o)
    return parse_ordering(read_text(o), g.p)


def _threads(args):
    t = args.threads if args.threads is not None else (os.cpu_count() or 1)
    if t < 1:
        raise InputError("--threads must be at least 1")
    return t


# ---------------------------------------------------------------- commands

def cmd_estimate(args):
    s = _load_cov(args)
    g, extra = _load_graph(args, s=s)
    ordering = _ordering_arg(args, g)
    est = cca_estimate(s, g, ordering=ordering, path=args.path, threads=_threads(args))
    check = verify_membership(est.omega_hat, g)
    summary = est.summary()
    report = {k: v for k, v in summary.items() if not k.startswith("time_")}
    report.update(extra)
    report["membership"] = check.describe()
    if args.out:
        _write_matrix(args.out, est.omega_hat, args.out_format,
                      "precision estimate (constrained Cholesky)", g)
    _emit(args, report)
    _emit_timings(args, {k: v for k, v in summary.items() if k.startswith("time_")})
    return 0


def cmd_mle(args):
    s = _load_cov(args)
    g, extra = _load_graph(args, s=s)
    init = "diagonal"
    if args.warm_start == "cca":
        init = cca_estimate(s, g, threads=_threads(args)).omega_hat
    cfg = IterativeConfig(tol=args.tol, max_iter=args.max_iter, init=init, clique_cap=args.clique_cap)
    solver = {"ipf": ipf_mle, "gipf": gipf_mle}[args.method]
    res = solver(s, g, cfg)
    report = {"method": args.method, "warm_start": args.warm_start or "none", **res.summary(), **extra}
    report["membership"] = verify_membership(res.omega, g).describe()
    if args.out:
        _write_matrix(args.out, res.omega, args.out_format, f"maximum-likelihood estimate ({args.method})", g)
    _emit(args, report)
    return 0


def _graph_only(args):
    if args.graph is None and args.graph_family is None:
        raise InputError("give --graph or --graph-family")
    return _load_graph(args)[0]


def cmd_order(args):
    g = _graph_only(args)
    sigma = _ordering_arg(args, g)
    text = format_ordering(sigma)
    if args.out:
        write_text(args.out, text)
        og = apply_ordering(g, sigma)
        _emit(args, {"p": g.p, "n_edges": g.n_edges, "bandwidth_before": bandwidth(g),
                     "bandwidth_after": bandwidth(og.relabeled)})
    else:
        sys.stdout.write(text)
    return 0


def cmd_fill(args):
    g = _graph_only(args)
    sigma = _ordering_arg(args, g)
    fg = filled_graph(apply_ordering(g, sigma))
    cost = complexity_estimate(fg)
    seq = sigma.sequence
    fills = [[i + 1, j + 1, seq[i] + 1, seq[j] + 1] for i, j in fg.fillins]
    report = {
        "p": g.p,
        "n_edges": g.n_edges,
        "n_fillins": fg.n_fillins,
        "n_filled_edges": len(fg.edges_filled),
        "max_column_count": max(fg.col_nnz, default=0),
        "max_row_count": max(fg.row_counts, default=0),
        "sum_n_cubed": cost.sum_n_cubed,
        "path": cost.path,
    }
    if args.format == "json":
        report["fillins"] = fills
        _emit(args, report)
    else:
        lines = "".join(f"fillin {a} {b} vertices {c} {d}\n" for a, b, c, d in fills)
        _emit(args, report, lines)
    return 0


def cmd_scca(args):
    g = _graph_only(args)
    sigma = _ordering_arg(args, g)
    fg = filled_graph(apply_ordering(g, sigma))
    rep = s_cca_diagnostics(fg, args.delta).as_dict()
    if args.format != "json":
        rep["dependencies"] = [";".join(str(x) for x in dep) or "-" for dep in rep["dependencies"]]
    _emit(args, {"p": g.p, "n_fillins": fg.n_fillins, **rep})
    return 0


def _split(text):
    return [x.strip() for x in text.split(",") if x.strip()]


def cmd_bench(args):
    if args.config:
        if any(v is not None for v in (args.p, args.n)):
            raise InputError("--config cannot be combined with --p/--n")
        cells = parse_bench_config(read_text(args.config))
    else:
        if args.p is None or args.n is None:
            raise InputError("give --config or both --p and --n")
        cells = build_cells(_split(args.p), _split(args.n), _split(args.dist), _split(args.methods),
                            args.reps, args.seed, args.tol, args.max_iter)
    res = run_benchmark(cells)
    # with --timings the primary CSVs carry no wall times and are reproducible byte for byte
    keep_times = args.timings is None
    raw = res.rows_csv(include_timings=keep_times)
    if args.out:
        write_text(args.out, raw)
    else:
        sys.stdout.write(raw)
    if args.summary:
        write_text(args.summary, res.summary_csv(include_timings=keep_times))
    if not keep_times:
        write_text(args.timings, res.rows_csv())
    return 0


def cmd_portfolio(args):
    data = read_data_csv(read_text(args.returns))
    if (args.graph is None) == (args.target_sparsity is None):
        raise InputError("give exactly one of --graph or --target-sparsity")
    g = parse_graph(read_text(args.graph)) if args.graph else None
    records = rolling_portfolio(data.values, args.nest, step=args.step, graph=g,
                                target_sparsity=args.target_sparsity, ordering=args.ordering)
    names = list(data.variable_names) if data.variable_names else [f"x{k + 1}" for k in range(data.p)]
    header = ["window_start", "window_end", "n_edges", "in_sample_variance", "out_of_sample_variance"] + names
    lines = [",".join(header)]
    for r in records:
        vals = [str(r.start + 1), str(r.end), str(r.n_edges), repr(r.in_sample_variance),
                repr(r.out_of_sample_variance)] + [repr(float(w)) for w in r.weights]
        lines.append(",".join(vals))
    text = "\n".join(lines) + "\n"
    if args.out:
        write_text(args.out, text)
    else:
        sys.stdout.write(text)
    oos = np.array([r.out_of_sample_variance for r in records])
    report = {
        "periods": len(records),
        "mean_in_sample_variance": float(np.mean([r.in_sample_variance for r in records])),
        "mean_out_of_sample_variance": float(np.nanmean(oos)) if np.isfinite(oos).any() else float("nan"),
    }
    if args.report:
        write_text(args.report, _render(report, args.format))
    return 0


# ---------------------------------------------------------------- parser

def _add_common(sp):
    sp.add_argument("--format", choices=("text", "json"), default="text", help="report format")
    sp.add_argument("--report", help="write the report here instead of stdout")


def _add_graph(sp, selection=False):
    sp.add_argument("--graph", help="edge-list file (header 'p N', 1-based pairs)")
    sp.add_argument("--graph-family", help="named family, e.g. cycle:8, grid:3x3, bipartite:2,6")
    if selection:
        sp.add_argument("--select-threshold", type=float, metavar="TAU",
                        help="keep pairs whose |inverse covariance| exceeds TAU")
        sp.add_argument("--target-sparsity", type=float, metavar="FRACTION",
                        help="choose the threshold so this fraction of pairs has no edge")


def _add_ordering(sp):
    sp.add_argument("--ordering", default="rcm", help="rcm, natural, or an ordering file")


def _add_inputs(sp):
    sp.add_argument("--cov", help="covariance matrix (dense CSV or triplets)")
    sp.add_argument("--data", help="observations CSV (rows = observations)")
    _add_graph(sp, selection=True)
    sp.add_argument("--out", help="write the estimate here")
    sp.add_argument("--out-format", choices=("triplet", "csv"), default="triplet")
    sp.add_argument("--threads", type=int, default=None, help="worker threads (default: CPU count)")


def build_parser():
    ap = argparse.ArgumentParser(prog="cholcca", description="Sparse precision estimation "
                                 "with a known zero pattern by constrained Cholesky adjustment.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("estimate", help="CCA estimate of the precision matrix")
    _add_inputs(sp)
    _add_ordering(sp)
    sp.add_argument("--path", choices=("auto", "column", "dense"), default="auto")
    sp.add_argument("--timings", help="write stage timings here")
    _add_common(sp)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("mle", help="iterative maximum-likelihood estimate (IPF or G-IPF)")
    _add_inputs(sp)
    sp.add_argument("--method", choices=("ipf", "gipf"), default="gipf")
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--max-iter", type=int, default=5000)
    sp.add_argument("--warm-start", choices=("cca",), default=None)
    sp.add_argument("--clique-cap", type=int, default=DEFAULT_CLIQUE_CAP)
    _add_common(sp)
    sp.set_defaults(func=cmd_mle)

    for name, func, hlp in (("order", cmd_order, "write a vertex ordering"),
                            ("fill", cmd_fill, "filled graph and fill-in list"),
                            ("scca", cmd_scca, "Step-II dependency diagnostics")):
        sp = sub.add_parser(name, help=hlp)
        _add_graph(sp)
        _add_ordering(sp)
        if name == "order":
            sp.add_argument("--out", help="write the ordering here (default stdout)")
        if name == "scca":
            sp.add_argument("--delta", type=float, default=1.0, help="eigenvalue lower bound")
        _add_common(sp)
        sp.set_defaults(func=func)

    sp = sub.add_parser("bench", help="replicated CCA versus iterative MLE benchmark")
    sp.add_argument("--config", help="key=value benchmark description")
    sp.add_argument("--p", help="dimension(s), comma separated")
    sp.add_argument("--n", help="sample size(s), comma separated")
    sp.add_argument("--dist", default="gaussian", help="gaussian and/or tK, comma separated")
    sp.add_argument("--methods", default="cca,gipf")
    sp.add_argument("--reps", type=int, default=20)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--max-iter", type=int, default=5000)
    sp.add_argument("--out", help="raw per-replication CSV (default stdout)")
    sp.add_argument("--summary", help="per-cell means CSV")
    sp.add_argument("--timings", help="move wall times out of the raw and summary CSVs into this file")
    sp.set_defaults(func=cmd_bench, format="text")

    sp = sub.add_parser("portfolio", help="rolling minimum-variance portfolio")
    sp.add_argument("--returns", required=True, help="returns CSV (rows = periods)")
    sp.add_argument("--nest", type=int, required=True, help="estimation window length")
    sp.add_argument("--step", type=int, default=None, help="rebalancing interval (default: window)")
    sp.add_argument("--graph", help="fixed edge-list file")
    sp.add_argument("--target-sparsity", type=float, help="threshold each window's inverse covariance")
    _add_ordering(sp)
    sp.add_argument("--out", help="weights CSV (default stdout)")
    _add_common(sp)
    sp.set_defaults(func=cmd_portfolio)
    return ap


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CCAError as exc:
        print(f"cholcca {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
