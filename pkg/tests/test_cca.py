import numpy as np
import pytest

from cholcca.baselines import IterativeConfig, ipf_mle
from cholcca.cca import cca_adjust, cca_estimate, resolve_ordering, step2_objective, verify_membership
from cholcca.chordal import CholFactor, chordal_cholesky_mle, clique_mle_oracle
from cholcca.errors import InputError, NumericalFailure
from cholcca.graph import (
    Graph,
    VertexOrdering,
    apply_ordering,
    filled_graph,
    natural_ordering,
    rcm_ordering,
)
from cholcca.simgen import gen_named_graph

from conftest import CYCLE4, CYCLE4_FACTOR, CYCLE4_OMEGA, random_decomposable, random_graph, rel_max, wishart_cov


def ordered_fill(g, ordering):
    og = apply_ordering(g, ordering)
    return og, filled_graph(og)


def positioned(s, ordering):
    seq = np.asarray(ordering.sequence)
    return s[np.ix_(seq, seq)]


def step1(s, g, ordering):
    og, fg = ordered_fill(g, ordering)
    return chordal_cholesky_mle(positioned(s, ordering), fg), og, fg


# ------------------------------------------------------------------ cca_adjust

def test_adjust_recovers_four_cycle_fillin():
    og, fg = ordered_fill(CYCLE4, natural_ordering(4))
    assert fg.fillins == ((3, 1),)
    start = CYCLE4_FACTOR.copy()
    start[3, 1] = 0.0
    out = cca_adjust(CholFactor(start, fg.lower_mask(include_diagonal=False)), og, fg)
    assert abs(out.values[3, 1] - (-0.204)) <= 1e-3
    om = out.omega()
    assert abs(om[3, 1]) <= 1e-12 and abs(om[2, 0]) <= 1e-12


def test_adjust_is_identity_without_fillins():
    rng = np.random.default_rng(0)
    g = random_decomposable(rng, 12)
    s = wishart_cov(rng, 12, 40)
    ld, og, fg = step1(s, g, natural_ordering(12))
    assert fg.n_fillins == 0
    assert np.array_equal(cca_adjust(ld, og, fg).values, ld.values)


def test_adjust_zeros_on_five_cycle():
    g = gen_named_graph("cycle", 5)
    rng = np.random.default_rng(1)
    s = wishart_cov(rng, 5, 20)
    o = rcm_ordering(g)
    ld, og, fg = step1(s, g, o)
    om = cca_adjust(ld, og, fg).omega()
    for i, j in fg.fillins:
        assert abs(om[i, j]) <= 1e-12 * np.abs(om).max()


def test_adjust_never_touches_graph_or_diagonal():
    rng = np.random.default_rng(2)
    for _ in range(30):
        p = int(rng.integers(5, 30))
        g = random_graph(rng, p, 0.2)
        ld, og, fg = step1(wishart_cov(rng, p, 3 * p), g, rcm_ordering(g))
        out = cca_adjust(ld, og, fg).values
        idx = np.arange(p)
        assert np.array_equal(out[idx, idx], ld.values[idx, idx])
        for i, j in og.edges_sigma:
            assert out[i, j] == ld.values[i, j]
        assert step2_objective(out, ld, og) == 0.0


@pytest.mark.parametrize("p", range(5, 13))
def test_cycle_fillins_follow_product_formula(p):
    g = gen_named_graph("cycle", p)
    rng = np.random.default_rng(p)
    ld, og, fg = step1(wishart_cov(rng, p, 4 * p), g, rcm_ordering(g))
    L = cca_adjust(ld, og, fg).values

    def at(i, j):  # 1-based access in the ordered labelling
        return L[i - 1, j - 1]

    assert sorted((i + 1, j + 1) for i, j in fg.fillins) == [(i, i - 1) for i in range(3, p)]
    for i in range(3, p):
        prod = np.prod([at(j, j - 2) / at(j, j) for j in range(3, i)])
        expected = (-1) ** (i - 2) * at(i, i - 2) * (at(2, 1) / at(2, 2)) * prod
        assert abs(at(i, i - 1) - expected) <= 1e-10 * max(1.0, abs(expected))


def test_adjust_dimension_check():
    og, fg = ordered_fill(CYCLE4, natural_ordering(4))
    with pytest.raises(InputError):
        cca_adjust(CholFactor(np.eye(3), np.zeros((3, 3), bool)), og, fg)


# --------------------------------------------------------------- cca_estimate

def test_identity_covariance():
    rep = cca_estimate(np.eye(6), gen_named_graph("cycle", 6))
    assert np.allclose(rep.omega_hat, np.eye(6), atol=1e-15)


def test_four_cycle_precision_is_a_fixed_point():
    rep = cca_estimate(np.linalg.inv(CYCLE4_OMEGA), CYCLE4, ordering="natural")
    assert np.abs(rep.omega_hat - CYCLE4_OMEGA).max() <= 1e-3
    assert np.abs(rep.l_hat.values - CYCLE4_FACTOR).max() <= 1e-3
    rep = cca_estimate(np.linalg.inv(CYCLE4_OMEGA), CYCLE4)
    assert np.abs(rep.omega_hat - CYCLE4_OMEGA).max() <= 1e-3


def test_path_graph_matches_ipf():
    rng = np.random.default_rng(4)
    s = wishart_cov(rng, 4, 30)
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    rep = cca_estimate(s, g)
    ipf = ipf_mle(s, g, IterativeConfig(tol=1e-12))
    assert np.abs(rep.omega_hat - ipf.omega).max() <= 1e-6
    assert rep.n_fillins == 0


def test_disconnected_blocks_are_exactly_zero():
    rng = np.random.default_rng(5)
    g = Graph.from_edges(7, [(0, 3), (3, 5), (5, 0), (1, 2), (2, 6), (6, 4)])
    s = wishart_cov(rng, 7, 40)
    rep = cca_estimate(s, g)
    assert rep.n_components == 2
    a, b = [0, 3, 5], [1, 2, 4, 6]
    assert np.all(rep.omega_hat[np.ix_(a, b)] == 0)
    assert np.allclose(rep.omega_from_factor(), rep.omega_hat, atol=1e-12)


def test_failure_names_component():
    rng = np.random.default_rng(6)
    x = rng.standard_normal((3, 8))
    # rank-3 block on the K4 component {4,...,7}; the rest is well conditioned
    s = x.T @ x / 3 * np.outer(np.r_[np.zeros(4), np.ones(4)], np.r_[np.zeros(4), np.ones(4)])
    s += np.diag(np.r_[np.ones(4), np.zeros(4)])
    g = Graph.from_edges(8, [(0, 1), (5, 6), (6, 7), (7, 4), (4, 5), (5, 7), (4, 6)])
    with pytest.raises(NumericalFailure) as exc:
        cca_estimate(s, g, ordering="natural")
    assert exc.value.component == 4 and exc.value.column is not None
    assert "component 4" in str(exc.value)


def test_input_validation():
    with pytest.raises(InputError):
        cca_estimate(np.array([[1.0, 0.5], [0.0, 1.0]]), Graph.complete(2))
    with pytest.raises(InputError):
        cca_estimate(np.eye(3), CYCLE4)
    with pytest.raises(InputError):
        cca_estimate(np.diag([1.0, 0.0]), Graph.complete(2))
    with pytest.raises(InputError):
        cca_estimate(np.eye(4), CYCLE4, path="magic")
    with pytest.raises(InputError):
        cca_estimate(np.eye(4), CYCLE4, ordering="alphabetical")
    with pytest.raises(InputError):
        resolve_ordering(CYCLE4, natural_ordering(3))


def test_threads_give_identical_results():
    rng = np.random.default_rng(7)
    g = Graph.from_edges(30, [(i, i + 1) for i in range(29) if i % 10 != 9] + [(0, 5), (12, 17), (22, 28)])
    s = wishart_cov(rng, 30, 90)
    a = cca_estimate(s, g, threads=1)
    b = cca_estimate(s, g, threads=4)
    assert np.array_equal(a.omega_hat, b.omega_hat)


@pytest.mark.parametrize("path", ["column", "dense"])
def test_explicit_paths_agree(path):
    rng = np.random.default_rng(8)
    g = random_graph(rng, 15, 0.3)
    s = wishart_cov(rng, 15, 60)
    ref = cca_estimate(s, g, path="column").omega_hat
    assert rel_max(cca_estimate(s, g, path=path).omega_hat, ref) <= 1e-8


def test_orderings_both_feasible_and_report_fill():
    rng = np.random.default_rng(9)
    g = random_graph(rng, 25, 0.15)
    s = wishart_cov(rng, 25, 75)
    nat = cca_estimate(s, g, ordering="natural")
    rcm = cca_estimate(s, g, ordering="rcm")
    for rep in (nat, rcm):
        assert verify_membership(rep.omega_hat, g).passed
        assert set(rep.summary()) >= {"n_fillins", "path", "min_eigenvalue", "time_step2"}
    explicit = cca_estimate(s, g, ordering=list(rcm.ordering.sigma))
    assert np.array_equal(explicit.omega_hat, rcm.omega_hat)


def test_scaling_equivariance():
    rng = np.random.default_rng(10)
    for _ in range(10):
        p = int(rng.integers(5, 25))
        g = random_graph(rng, p, 0.25)
        s = wishart_cov(rng, p, 3 * p)
        d = rng.uniform(0.1, 10.0, size=p)
        a = cca_estimate(s * np.outer(d, d), g).omega_hat
        b = cca_estimate(s, g).omega_hat / np.outer(d, d)
        assert rel_max(a, b) <= 1e-10


def test_idempotent_on_feasible_inverse():
    rng = np.random.default_rng(11)
    for _ in range(10):
        p = int(rng.integers(5, 20))
        g = random_graph(rng, p, 0.3)
        omega = cca_estimate(wishart_cov(rng, p, 3 * p), g).omega_hat
        again = cca_estimate(np.linalg.inv(omega), g).omega_hat
        assert rel_max(again, omega) <= 1e-8


def test_chordal_graph_gives_oracle():
    rng = np.random.default_rng(12)
    g = random_decomposable(rng, 15)
    s = wishart_cov(rng, 15, 50)
    rep = cca_estimate(s, g, ordering="natural")
    fg = filled_graph(apply_ordering(g, natural_ordering(15)))
    assert rel_max(rep.omega_hat, clique_mle_oracle(s, fg)) <= 1e-10


# ---------------------------------------------------- membership and objective

def test_membership_examples():
    rep = verify_membership(CYCLE4_OMEGA, CYCLE4)
    assert rep.passed and rep.max_offpattern_abs == 0
    assert verify_membership(np.eye(5), Graph(5, frozenset())).passed
    leaky = CYCLE4_OMEGA.copy()
    leaky[2, 0] = leaky[0, 2] = 1e-3
    rep = verify_membership(leaky, CYCLE4, tol=1e-10)
    assert not rep.passed and rep.worst_position == (3, 1)
    assert "(3, 1)" in rep.describe()


def test_membership_on_ordered_graph_and_bad_tol():
    og = apply_ordering(CYCLE4, VertexOrdering((0, 1, 2, 3)))
    assert verify_membership(CYCLE4_OMEGA, og)
    with pytest.raises(InputError):
        verify_membership(CYCLE4_OMEGA, CYCLE4, tol=0)
    with pytest.raises(InputError):
        verify_membership(np.eye(3), CYCLE4)
    assert not verify_membership(-np.eye(4), CYCLE4).passed


def test_step2_objective_examples():
    og = apply_ordering(CYCLE4, natural_ordering(4))
    ld = CholFactor(CYCLE4_FACTOR, np.tril(np.ones((4, 4), bool), -1))
    assert step2_objective(ld, ld, og) == 0.0
    bumped = CYCLE4_FACTOR.copy()
    bumped[1, 0] += 1.0
    assert step2_objective(bumped, ld, og) == pytest.approx(1.0, abs=1e-15)
    fill_only = CYCLE4_FACTOR.copy()
    fill_only[3, 1] += 1.0
    assert step2_objective(fill_only, ld, og) == 0.0
    with pytest.raises(InputError):
        step2_objective(np.eye(3), ld, og)
