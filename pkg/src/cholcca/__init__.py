"""Precision-matrix estimation under a known zero pattern.

The main entry point is :func:`cca_estimate`, a non-iterative estimator that
fits the closed-form Cholesky MLE on a chordal cover of the graph and then
adjusts the fill-in entries so the product has the required zeros.
Iterative maximum-likelihood baselines (:func:`ipf_mle`, :func:`gipf_mle`),
graph utilities, simulation tools and a benchmark harness are included.
"""

from types import ModuleType as _ModuleType

__version__ = "0.1.0"

from .errors import CCAError, InputError, NumericalFailure, ResourceError
from .graph import (
    FilledGraph,
    Graph,
    OrderedGraph,
    VertexOrdering,
    apply_ordering,
    bandwidth,
    connected_components,
    filled_graph,
    format_graph,
    format_ordering,
    induced_subgraph,
    is_perfect_elimination,
    maximal_cliques,
    natural_ordering,
    parse_graph,
    parse_ordering,
    rcm_ordering,
)
from .cov import DataMatrix, generalized_inverse, sample_covariance, threshold_graph, to_correlation
from .chordal import CholFactor, chordal_cholesky_mle, chordal_completion, clique_mle_oracle, dense_step1
from .diagnostics import SccaReport, complexity_estimate, dense_path_rule, s_cca_diagnostics
from .cca import EstimateReport, MembershipReport, cca_adjust, cca_estimate, step2_objective, verify_membership
from .baselines import IterativeConfig, IterativeResult, gipf_mle, ipf_mle, neg_loglik
from .simgen import (
    SyntheticModel,
    gen_named_graph,
    gen_random_model,
    rel_frobenius_error,
    sample_gaussian,
    sample_mvt,
)
from .bench import BenchCell, BenchRow, run_benchmark
from .portfolio import min_variance_weights, rolling_portfolio

__all__ = [name for name, obj in list(globals().items())
           if not name.startswith("_") and not isinstance(obj, _ModuleType)]
