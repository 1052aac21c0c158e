"""Graph-dependent rate and cost diagnostics computed from a filled graph."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InputError

__all__ = [
    "SccaReport",
    "CostReport",
    "fillin_dependencies",
    "g_values",
    "s_cca_diagnostics",
    "complexity_estimate",
    "dense_path_rule",
]


@dataclass(frozen=True)
class SccaReport:
    a_D: int
    a_tilde_D: int
    c: int
    g_values: tuple
    s_cca: float
    delta: float
    step1_factor: int
    step2_factor: float
    dependencies: tuple = field(repr=False, default=())
    g_values_main: tuple = field(repr=False, default=())

    def as_dict(self):
        return {
            "a_D": self.a_D,
            "a_tilde_D": self.a_tilde_D,
            "c": self.c,
            "delta": self.delta,
            "step1_factor": self.step1_factor,
            "step2_factor": self.step2_factor,
            "max_g": max(self.g_values, default=0.0),
            "s_cca": self.s_cca,
            "g_values": list(self.g_values),
            "g_values_main": list(self.g_values_main),
            "dependencies": [[r + 1 for r in dep] for dep in self.dependencies],
        }


def fillin_dependencies(fg):
    """For each fill-in r, the earlier fill-ins feeding its Step-II update.

    With the r-th fill-in at (i, j), fill-in s belongs to the set when, for
    some k < j, either s sits at (j, k) and (i, k) is in the filled graph, or
    s sits at (i, k) and (j, k) is in the filled graph. Indices are 0-based.
    """
    index = {e: r for r, e in enumerate(fg.fillins)}
    rows = fg.row_patterns
    filled = fg.edges_filled
    deps = []
    for i, j in fg.fillins:
        found = set()
        for k in rows[j]:
            k = int(k)
            s = index.get((j, k))
            if s is not None and (i, k) in filled:
                found.add(s)
        for k in rows[i]:
            k = int(k)
            if k >= j:
                break
            s = index.get((i, k))
            if s is not None and (j, k) in filled:
                found.add(s)
        deps.append(tuple(sorted(found)))
    return tuple(deps)


def g_values(deps, delta, form="proof"):
    """Error-propagation weights over the fill-in sequence.

    ``form="proof"`` uses g(r) = (3/delta) * (2 + sum of g over deps), which
    is the bound actually derived for the induction step; ``form="main"``
    drops the additive 2. Both start from g(1) = 6/delta.
    """
    if delta <= 0:
        raise InputError(f"delta must be positive, got {delta}")
    if form not in ("proof", "main"):
        raise InputError(f"unknown g form {form!r}")
    extra = 2.0 if form == "proof" else 0.0
    g = []
    for r, dep in enumerate(deps):
        if r == 0:
            g.append(6.0 / delta)
        else:
            g.append(3.0 / delta * (extra + sum(g[s] for s in dep)))
    return tuple(g)


def s_cca_diagnostics(fg, delta):
    if not delta > 0:
        raise InputError(f"delta must be positive, got {delta}")
    p = fg.p
    col_fill = [0] * p
    row_fill = [0] * p
    for i, j in fg.fillins:
        row_fill[i] += 1
        col_fill[j] += 1
    col = fg.col_nnz
    max_col = max(col[: p - 1], default=0)
    max_row = max(fg.row_counts[1:], default=0)
    a_D = (1 + max_col) * (1 + max_row)
    a_tilde = max(col_fill[: p - 1], default=0) * max(row_fill[1:], default=0)
    deps = fillin_dependencies(fg)
    g = g_values(deps, delta)
    step1 = min(a_D, len(fg.edges_filled) + 1)
    if fg.fillins:
        step2 = a_tilde * (1.0 + max(g)) ** 2
    else:
        step2 = 1
    return SccaReport(
        a_D=a_D,
        a_tilde_D=a_tilde,
        c=len(fg.fillins),
        g_values=g,
        s_cca=step1 * step2,
        delta=float(delta),
        step1_factor=step1,
        step2_factor=step2,
        dependencies=deps,
        g_values_main=g_values(deps, delta, form="main"),
    )


def dense_path_rule(p, n_filled_edges):
    """True when the filled graph is dense enough for the O(p^3) route."""
    return n_filled_edges > p ** (5.0 / 3.0)


@dataclass(frozen=True)
class CostReport:
    sum_n_cubed: int
    step2_cost: int
    dense_cost: int
    n_filled_edges: int
    path: str

    def as_dict(self):
        return dict(self.__dict__)


def complexity_estimate(fg):
    p = fg.p
    m = len(fg.edges_filled)
    return CostReport(
        sum_n_cubed=sum(n ** 3 for n in fg.col_nnz),
        step2_cost=p * len(fg.fillins),
        dense_cost=p ** 3,
        n_filled_edges=m,
        path="dense" if dense_path_rule(p, m) else "column",
    )
