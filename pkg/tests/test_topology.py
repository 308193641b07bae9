import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import gradtrack as gt
from gradtrack.topology import (build_graph, compute_beta, matrix_power,
                                metropolis_weights, mixing_matrix, read_matrix_csv,
                                strategy_for, validate_communication_matrix,
                                write_matrix_csv)

from conftest import eig_beta, eig_matrix_power


# ---------------------------------------------------------------- graphs

def test_complete_two_nodes_has_the_only_edge():
    g = build_graph("complete", 2)
    assert g.edges == frozenset({(0, 1)})


def test_cycle_four_nodes():
    g = build_graph("cycle", 4)
    assert g.edges == frozenset({(0, 1), (1, 2), (2, 3), (0, 3)})
    assert g.is_connected()


def test_star_sixteen_nodes_all_edges_at_hub():
    g = build_graph("star", 16)
    assert len(g.edges) == 15
    assert all(0 in e for e in g.edges)
    assert g.is_connected()


@pytest.mark.parametrize("kind,n", [("cycle", 2), ("star", 1), ("complete", 0)])
def test_invalid_counts_rejected(kind, n):
    with pytest.raises(ValueError):
        build_graph(kind, n)


def test_edge_list_rejects_self_loops_and_duplicates():
    with pytest.raises(ValueError, match="self-loop"):
        build_graph("edge_list", 3, edges=[(0, 0)])
    with pytest.raises(ValueError, match="duplicate"):
        build_graph("edge_list", 3, edges=[(0, 1), (1, 0)])
    with pytest.raises(ValueError, match="invalid node"):
        build_graph("edge_list", 3, edges=[(0, 5)])


def test_generators_yield_connected_graphs():
    for kind, n in [("cycle", 3), ("cycle", 9), ("star", 2), ("star", 7), ("complete", 1)]:
        assert build_graph(kind, n).is_connected()


# ------------------------------------------------------- metropolis weights

def test_complete_two_nodes_gives_exact_averaging():
    w = metropolis_weights(build_graph("complete", 2))
    assert np.array_equal(w.w, np.full((2, 2), 0.5))
    assert w.beta == 0.0


def test_cycle_four_weights_and_beta():
    # degrees are all 2, so every edge weight and the diagonal equal 1/3;
    # the eigensolver oracle puts the deflated spectral norm at 1/3
    w = metropolis_weights(build_graph("cycle", 4))
    assert w.w[0, 1] == pytest.approx(1 / 3, abs=1e-15)
    assert w.w[0, 0] == pytest.approx(1 / 3, abs=1e-15)
    assert w.beta == pytest.approx(eig_beta(w.w), abs=1e-12)
    assert w.beta == pytest.approx(1 / 3, abs=1e-12)


def test_star_sixteen_leaf_self_weight_and_beta():
    w = metropolis_weights(build_graph("star", 16))
    assert w.w[1, 1] == pytest.approx(15 / 16, abs=1e-15)
    assert w.beta == pytest.approx(eig_beta(w.w), abs=1e-12)
    assert w.beta == pytest.approx(15 / 16, abs=1e-12)


def test_lazy_cycle_beta_matches_eigensolver_oracle():
    w = metropolis_weights(build_graph("cycle", 4), laziness=0.25)
    assert w.beta == pytest.approx(eig_beta(w.w), abs=1e-12)


def test_disconnected_graph_rejected():
    g = build_graph("edge_list", 4, edges=[(0, 1), (2, 3)])
    with pytest.raises(ValueError, match="disconnected"):
        metropolis_weights(g)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(min_value=3, max_value=24),
       kind=st.sampled_from(["cycle", "star", "complete"]),
       laziness=st.floats(min_value=0.0, max_value=0.9))
def test_metropolis_invariants(n, kind, laziness):
    g = build_graph(kind, n)
    w = metropolis_weights(g, laziness=laziness)
    assert np.array_equal(w.w, w.w.T)
    assert np.max(np.abs(w.w.sum(axis=1) - 1.0)) <= 1e-12
    assert np.max(np.abs(w.w.sum(axis=0) - 1.0)) <= 1e-12
    assert np.all(w.w >= 0)
    assert np.all(np.diag(w.w) > 0)
    adj = g.adjacency()
    off = w.w - np.diag(np.diag(w.w))
    assert np.all((off > 0) == (adj > 0))
    assert 0.0 <= w.beta < 1.0


# -------------------------------------------------------------- compute_beta

def test_beta_of_averaging_matrix_is_zero():
    n = 5
    assert compute_beta(np.full((n, n), 1 / n)) == 0.0


def test_beta_of_identity_is_one():
    assert compute_beta(np.eye(4)) == 1.0


def test_beta_rejects_bad_inputs():
    with pytest.raises(ValueError, match="square"):
        compute_beta(np.ones((2, 3)))
    with pytest.raises(ValueError, match="stochastic"):
        compute_beta(np.array([[0.5, 0.2], [0.2, 0.5]]))
    with pytest.raises(ValueError, match="symmetric"):
        compute_beta(np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]]))


@pytest.mark.parametrize("p", [1, 2, 5, 10])
def test_beta_of_power_is_power_of_beta(p, cycle8_mixing):
    w = cycle8_mixing
    assert compute_beta(matrix_power(w.w, p)) == pytest.approx(w.beta**p, abs=1e-10)


# -------------------------------------------------------------- matrix_power

def test_power_one_is_identity_operation(cycle8_mixing):
    assert np.array_equal(matrix_power(cycle8_mixing.w, 1), cycle8_mixing.w)


def test_power_zero_is_identity():
    assert np.array_equal(matrix_power(np.full((3, 3), 1 / 3), 0), np.eye(3))


def test_averaging_matrix_is_idempotent():
    j = np.full((4, 4), 0.25)
    assert np.max(np.abs(matrix_power(j, 3) - j)) <= 1e-15


def test_power_matches_eigendecomposition_oracle():
    w = metropolis_weights(build_graph("cycle", 4), laziness=0.25).w
    for p in (2, 5, 10):
        assert np.max(np.abs(matrix_power(w, p) - eig_matrix_power(w, p))) <= 1e-10


def test_power_preserves_double_stochasticity(cycle8_mixing):
    wp = matrix_power(cycle8_mixing.w, 100)
    assert np.max(np.abs(wp.sum(axis=0) - 1.0)) <= 1e-10
    assert np.max(np.abs(wp.sum(axis=1) - 1.0)) <= 1e-10


# ------------------------------------------------------------- strategies

def test_gta1_beta_assignment(cycle8_mixing):
    s = strategy_for("GTA1", cycle8_mixing, 1)
    assert s.betas[0] == pytest.approx(cycle8_mixing.beta)
    assert s.betas[2] == pytest.approx(cycle8_mixing.beta)
    assert s.betas[1] == 1.0 and s.betas[3] == 1.0
    assert np.array_equal(s.w2, np.eye(8))


def test_gta3_over_averaging_matrix_has_zero_betas():
    w = metropolis_weights(build_graph("complete", 4))
    assert w.beta == 0.0
    s = strategy_for("GTA3", w, 1)
    assert s.betas == (0.0, 0.0, 0.0, 0.0)


def test_custom_strategy_on_edge_subset_accepted():
    g = build_graph("cycle", 4)
    w = metropolis_weights(g)
    tree = build_graph("edge_list", 4, edges=[(0, 1), (1, 2), (2, 3)])
    w_tree = metropolis_weights(tree).w
    # the path's edges are a subset of the cycle's, so it is a valid
    # communication matrix for the cycle as well
    validate_communication_matrix(w_tree, g)
    s = strategy_for("custom", w, 2, custom=(w.w, w_tree, w.w, w_tree))
    assert s.name == "custom"
    assert s.betas[1] == pytest.approx(eig_beta(w_tree), abs=1e-12)


def test_custom_strategy_rejects_off_graph_entries():
    w = metropolis_weights(build_graph("cycle", 4))
    bad = np.full((4, 4), 0.25)  # complete-graph support, not a cycle subgraph
    with pytest.raises(ValueError, match="outside the graph"):
        strategy_for("custom", w, 1, custom=(bad, bad, bad, bad))


def test_powered_matrices_cached(cycle8_mixing):
    s = strategy_for("GTA2", cycle8_mixing, 3)
    assert np.max(np.abs(s.powered[0] - matrix_power(cycle8_mixing.w, 3))) == 0.0
    assert np.array_equal(s.powered[3], np.eye(8))
    assert s.vectors_per_round() == 3


def test_strategy_requires_positive_nc(cycle8_mixing):
    with pytest.raises(ValueError):
        strategy_for("GTA1", cycle8_mixing, 0)


def test_identity_is_a_valid_communication_matrix_with_beta_one():
    g = build_graph("star", 5)
    validate_communication_matrix(np.eye(5), g)
    assert compute_beta(np.eye(5)) == 1.0


def test_mixing_matrix_rejects_zero_edge_weight():
    g = build_graph("cycle", 4)
    w = metropolis_weights(g).w.copy()
    w[0, 1] = w[1, 0] = 0.0
    w[0, 0] += 1 / 3
    w[1, 1] += 1 / 3
    with pytest.raises(ValueError, match="zero weight"):
        mixing_matrix(w, g)


# ------------------------------------------------------------------- csv

def test_matrix_csv_roundtrip(tmp_path, cycle8_mixing):
    path = tmp_path / "w.csv"
    write_matrix_csv(cycle8_mixing.w, path)
    back = read_matrix_csv(path)
    assert np.array_equal(back, cycle8_mixing.w)
