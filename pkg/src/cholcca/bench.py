"""Replicated timing and accuracy comparison of CCA against the iterative MLE solvers."""

from __future__ import annotations

import csv
import io
import itertools
import math
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .baselines import IterativeConfig, gipf_mle, ipf_mle
from .cca import cca_estimate, verify_membership
from .cov import sample_covariance
from .errors import InputError, NumericalFailure
from .simgen import gen_random_model, rel_frobenius_error, sample_gaussian, sample_mvt

__all__ = [
    "METHODS",
    "BenchCell",
    "BenchRow",
    "BenchResult",
    "rep_seed",
    "parse_distribution",
    "parse_bench_config",
    "build_cells",
    "run_benchmark",
]

METHODS = ("cca", "ipf", "gipf", "cca_warm_gipf")


def rep_seed(base_seed, rep, stream=0):
    """Deterministic 64-bit seed for one replication (and sub-stream)."""
    ss = np.random.SeedSequence([int(base_seed) & 0xFFFFFFFFFFFFFFFF, int(rep), int(stream)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def parse_distribution(name):
    """``"gaussian"`` gives None; ``"t"`` or ``"tK"`` gives the degrees of freedom."""
    name = str(name).strip().lower()
    if name in ("gaussian", "normal"):
        return None
    if name.startswith("t"):
        rest = name[1:] or "3"
        try:
            df = float(rest)
        except ValueError:
            raise InputError(f"unknown distribution {name!r}") from None
        if not df > 0:
            raise InputError("degrees of freedom must be positive")
        return df
    raise InputError(f"unknown distribution {name!r}; use gaussian or tK (e.g. t3)")


@dataclass(frozen=True)
class BenchCell:
    p: int
    n: int
    distribution: str = "gaussian"
    methods: tuple = ("cca", "gipf")
    reps: int = 20
    base_seed: int = 1
    tol: float = 1e-8
    max_iter: int = 5000

    def __post_init__(self):
        if self.p < 2 or self.n < 2:
            raise InputError("benchmark cells need p >= 2 and n >= 2")
        if self.reps < 1:
            raise InputError("reps must be at least 1")
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            raise InputError(f"unknown method(s) {bad}; choose from {list(METHODS)}")
        parse_distribution(self.distribution)


@dataclass
class BenchRow:
    method: str
    p: int
    n: int
    seed: int
    time_seconds: float
    rel_frob: float
    distribution: str
    iterations: int = 0
    status: str = "ok"
    feasible: bool = True


@dataclass
class BenchResult:
    rows: list
    summary: list = field(default_factory=list)

    def rows_csv(self, include_timings=True):
        names = [f.name for f in fields(BenchRow)]
        if not include_timings:
            names.remove("time_seconds")
        return _to_csv(names, [asdict(r) for r in self.rows])

    def summary_csv(self, include_timings=True):
        names = ["distribution", "p", "n", "method", "reps", "failures", "infeasible",
                 "mean_time_seconds", "mean_rel_frob", "mean_iterations"]
        if not include_timings:
            names.remove("mean_time_seconds")
        return _to_csv(names, self.summary)

    def mean(self, method, p, n, distribution="gaussian", key="mean_rel_frob"):
        for s in self.summary:
            if (s["method"], s["p"], s["n"], s["distribution"]) == (method, p, n, distribution):
                return s[key]
        raise KeyError((method, p, n, distribution))


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _to_csv(names, dicts):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for d in dicts:
        w.writerow([_fmt(d[k]) for k in names])
    return buf.getvalue()


def _run_method(method, s, model, cfg):
    t0 = time.perf_counter()
    iters = 0
    if method == "cca":
        omega = cca_estimate(s, model.graph).omega_hat
    elif method == "ipf":
        res = ipf_mle(s, model.graph, cfg)
        omega, iters = res.omega, res.iterations
    elif method == "gipf":
        res = gipf_mle(s, model.graph, cfg)
        omega, iters = res.omega, res.iterations
    else:
        warm = cca_estimate(s, model.graph).omega_hat
        res = gipf_mle(s, model.graph, IterativeConfig(cfg.tol, cfg.max_iter, init=warm))
        omega, iters = res.omega, res.iterations
    return omega, time.perf_counter() - t0, iters


def run_benchmark(cells, progress=None):
    """Run every (cell, replication, method) combination serially.

    Replication r of a cell draws its model from ``rep_seed(base_seed, r)``
    and its data from a second stream of the same seed, so cells sharing
    ``p`` and ``base_seed`` are paired: the same true matrices appear for
    every n and distribution. Method runs are timed one at a time.
    """
    rows = []
    for cell in cells:
        df = parse_distribution(cell.distribution)
        cfg = IterativeConfig(tol=cell.tol, max_iter=cell.max_iter)
        for r in range(cell.reps):
            seed = rep_seed(cell.base_seed, r)
            model = gen_random_model(cell.p, seed)
            data_seed = rep_seed(seed, 0, stream=1)
            if df is None:
                data = sample_gaussian(model, cell.n, data_seed)
            else:
                data = sample_mvt(model, df, cell.n, data_seed)
            s = sample_covariance(data)
            for method in cell.methods:
                try:
                    omega, secs, iters = _run_method(method, s, model, cfg)
                    err = rel_frobenius_error(omega, model.omega_true)
                    status = "ok"
                    feasible = verify_membership(omega, model.graph).passed
                except NumericalFailure:
                    secs, iters, err, status, feasible = 0.0, 0, math.nan, "failed", False
                rows.append(BenchRow(method, cell.p, cell.n, seed, secs, err,
                                     cell.distribution, iters, status, feasible))
                if progress is not None:
                    progress(rows[-1])
    return BenchResult(rows, _summarize(rows))


def _summarize(rows):
    out = []
    key = lambda r: (r.distribution, r.p, r.n, r.method)
    order = {}
    for r in rows:
        order.setdefault(key(r), len(order))
    for k, group in itertools.groupby(sorted(rows, key=lambda r: order[key(r)]), key=key):
        group = list(group)
        ok = [r for r in group if r.status == "ok"]
        mean = (lambda xs: float(np.mean(xs)) if xs else math.nan)
        out.append({
            "distribution": k[0], "p": k[1], "n": k[2], "method": k[3],
            "reps": len(group), "failures": len(group) - len(ok),
            "infeasible": sum(not r.feasible for r in ok),
            "mean_time_seconds": mean([r.time_seconds for r in ok]),
            "mean_rel_frob": mean([r.rel_frob for r in ok]),
            "mean_iterations": mean([r.iterations for r in ok]),
        })
    return out


_CONFIG_KEYS = {"p", "n", "dist", "distribution", "methods", "reps", "seed", "tol", "max_iter"}


def parse_bench_config(text):
    """Cells from ``key=value`` lines; ``p``, ``n`` and ``dist`` may list several values.

    Example::

        p = 200
        n = 100, 150, 200, 400
        dist = gaussian, t3
        methods = cca, gipf
        reps = 20
        seed = 1
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key = key.strip().lower().replace("-", "_")
        if not sep or key not in _CONFIG_KEYS:
            raise InputError(f"line {lineno}: expected key=value with key in {sorted(_CONFIG_KEYS)}")
        values["dist" if key == "distribution" else key] = [v.strip() for v in val.split(",") if v.strip()]
    for req in ("p", "n"):
        if req not in values:
            raise InputError(f"benchmark config needs {req}=...")
    return build_cells(values["p"], values["n"], values.get("dist", ["gaussian"]),
                       values.get("methods", ["cca", "gipf"]), _one(values, "reps", 20),
                       _one(values, "seed", 1), _one(values, "tol", 1e-8, float),
                       _one(values, "max_iter", 5000))


def _one(values, key, default, conv=int):
    if key not in values:
        return default
    if len(values[key]) != 1:
        raise InputError(f"{key} takes a single value")
    try:
        return conv(values[key][0])
    except ValueError:
        raise InputError(f"bad value for {key}: {values[key][0]!r}") from None


def build_cells(ps, ns, dists, methods, reps, seed, tol=1e-8, max_iter=5000):
    try:
        ps = [int(x) for x in ps]
        ns = [int(x) for x in ns]
    except ValueError:
        raise InputError("p and n must be integers") from None
    return [BenchCell(p, n, d, tuple(methods), int(reps), int(seed), float(tol), int(max_iter))
            for d in dists for p in ps for n in ns]
