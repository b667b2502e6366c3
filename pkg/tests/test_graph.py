import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from socialcoupon.graph import (
    Deployment,
    GraphFormatError,
    SocialGraph,
    assign_indegree_probabilities,
    generate_synthetic,
    load_edge_list,
    scale_ratios,
    write_economics,
    write_edge_list,
)


def test_load_defaults():
    g = load_edge_list(b"0 1\n0 2\n")
    assert (g.n_nodes, g.n_edges) == (3, 2)
    assert g.economics(0).benefit == 1.0
    assert g.economics(0).seed_cost == 1.0
    assert g.economics(0).sc_cost == 1.0
    assert g.economics(0).max_constraint == 2


def test_load_empty():
    g = load_edge_list(b"")
    assert (g.n_nodes, g.n_edges) == (0, 0)


def test_load_dedup_and_comments():
    g = load_edge_list("# header\n0 1\n0 1\n\n1 1\n")
    assert g.n_edges == 1


def test_load_sparse_raw_ids_are_remapped():
    g = load_edge_list(b"100 7\n7 5000000000\n")
    assert g.raw_ids == (7, 100, 5000000000)
    assert g.dense_id(100) == 1
    assert g.sorted_out_neighbors(g.dense_id(100)) == [(0, 1.0)]


def test_load_default_probability_is_reciprocal_indegree():
    g = load_edge_list(b"0 2\n1 2\n2 0\n")
    assert g.sorted_out_neighbors(0) == [(2, 0.5)]
    assert g.sorted_out_neighbors(2) == [(0, 1.0)]


def test_load_explicit_probability():
    g = load_edge_list(b"0 1 0.25\n")
    assert g.probs.tolist() == [0.25]


@pytest.mark.parametrize("text, line", [(b"0 1\nx 2\n", 2), (b"0\n", 1), (b"0 1 1.5\n", 1), (b"0 1 abc\n", 1)])
def test_load_malformed_reports_line(text, line):
    with pytest.raises(GraphFormatError) as info:
        load_edge_list(text)
    assert info.value.line == line


def test_economics_applied_and_validated():
    econ = b"node,benefit,seed_cost,sc_cost,max_constraint\n0,5,2,0.5,1\n"
    g = load_edge_list(b"0 1\n0 2\n", econ)
    e = g.economics(0)
    assert (e.benefit, e.seed_cost, e.sc_cost, e.max_constraint) == (5, 2, 0.5, 1)
    assert g.economics(1).benefit == 1.0


def test_economics_without_max_constraint_column():
    g = load_edge_list(b"0 1\n0 2\n", b"node,benefit,seed_cost,sc_cost\n0,5,2,0.5\n")
    assert g.economics(0).max_constraint == 2


def test_economics_only_node_becomes_isolated():
    g = load_edge_list(b"0 1\n", b"node,benefit,seed_cost,sc_cost\n9,4,1,1\n")
    assert g.n_nodes == 3
    assert g.economics(g.dense_id(9)).benefit == 4
    assert g.out_degree(g.dense_id(9)) == 0


@pytest.mark.parametrize("row", ["0,-1,1,1", "0,1,1,1,5", "0,a,1,1"])
def test_economics_bad_rows(row):
    with pytest.raises(GraphFormatError):
        load_edge_list(b"0 1\n", f"node,benefit,seed_cost,sc_cost,max_constraint\n{row}\n".encode())


def test_economics_bad_header():
    with pytest.raises(GraphFormatError):
        load_edge_list(b"0 1\n", b"id,b\n0,1\n")


def test_build_rejects_self_loop_and_bad_prob():
    with pytest.raises(ValueError):
        SocialGraph.build(2, [(0, 0, 0.5)])
    with pytest.raises(ValueError):
        SocialGraph.build(2, [(0, 1, 1.5)])
    with pytest.raises(ValueError):
        SocialGraph.build(2, [(0, 1, 0.5)], benefit=[-1, 0])


def test_sorted_out_neighbors_order_and_ties():
    g = SocialGraph.build(4, [(0, 2, 0.4), (0, 1, 0.6), (0, 3, 0.4)])
    assert g.sorted_out_neighbors(0) == [(1, 0.6), (2, 0.4), (3, 0.4)]
    assert g.sorted_out_neighbors(1) == []
    with pytest.raises(KeyError):
        g.sorted_out_neighbors(9)


def test_graph_arrays_are_read_only():
    g = SocialGraph.build(2, [(0, 1, 0.5)])
    with pytest.raises(ValueError):
        g.probs[0] = 0.9


def test_indegree_probabilities_star():
    g = SocialGraph.build(5, [(1, 0, 0.9), (2, 0, 0.9), (3, 0, 0.9), (0, 4, 0.3)])
    g = assign_indegree_probabilities(g)
    assert [p for _, p in g.sorted_out_neighbors(1)] == pytest.approx([1 / 3])
    assert g.sorted_out_neighbors(0) == [(4, 1.0)]


def test_indegree_probabilities_sum_to_one():
    g = assign_indegree_probabilities(generate_synthetic("uniform-random", 60, rng_seed=4))
    totals = np.zeros(g.n_nodes)
    np.add.at(totals, g.targets, g.probs)
    has_in = g.in_degrees > 0
    assert np.allclose(totals[has_in], 1.0)


def test_scale_ratios():
    g = SocialGraph.build(2, [(0, 1, 1.0)], benefit=[4, 6], sc_cost=[2, 3], seed_cost=[1, 3])
    s = scale_ratios(g, 1.0, None)
    assert s.benefit.tolist() == [2.0, 3.0]
    s = scale_ratios(g, None, 10.0)
    assert s.seed_cost.sum() / s.benefit.sum() == pytest.approx(10.0, abs=1e-12)
    assert s.seed_cost[1] / s.seed_cost[0] == pytest.approx(3.0)
    same = scale_ratios(SocialGraph.build(2, [(0, 1, 1.0)]), 1.0)
    assert same.benefit.tolist() == [1.0, 1.0]
    with pytest.raises(ValueError):
        scale_ratios(SocialGraph.build(2, [(0, 1, 1.0)], sc_cost=0.0), 1.0)


def test_scaling_resets_cost_cache():
    from socialcoupon.propagation import expected_sc_cost

    g = SocialGraph.build(2, [(0, 1, 1.0)], sc_cost=[1, 2])
    assert expected_sc_cost(g, {0: 1}) == 2.0
    h = g.with_economics(sc_cost=np.array([1.0, 5.0]))
    assert expected_sc_cost(h, {0: 1}) == 5.0


def test_synthetic_single_node_and_determinism():
    g = generate_synthetic("power-law", 1, rng_seed=0)
    assert (g.n_nodes, g.n_edges) == (1, 0)
    a = generate_synthetic("power-law", 200, rng_seed=5)
    b = generate_synthetic("power-law", 200, rng_seed=5)
    assert np.array_equal(a.targets, b.targets) and np.array_equal(a.benefit, b.benefit)


def test_synthetic_economics():
    g = generate_synthetic("uniform-random", 100, {"seed_cost_unit": 2.0, "sc_cost": 0.5}, rng_seed=1)
    assert np.all(g.benefit >= 0)
    assert np.allclose(g.seed_cost, 2.0 * np.maximum(g.out_degrees, 1))
    assert np.all(g.sc_cost == 0.5)


def test_synthetic_bad_params():
    with pytest.raises(ValueError):
        generate_synthetic("ring", 10)
    with pytest.raises(ValueError):
        generate_synthetic("power-law", 10, {"bogus": 1})
    with pytest.raises(ValueError):
        generate_synthetic("power-law", 0)


def test_power_law_degree_slope():
    g = generate_synthetic("power-law", 1000, {"exponent": 2.5}, rng_seed=11)
    deg = g.out_degrees
    values, counts = np.unique(deg, return_counts=True)
    # fit on the well-populated part of the histogram
    keep = counts >= 5
    slope = np.polyfit(np.log(values[keep]), np.log(counts[keep]), 1)[0]
    assert -3.0 <= slope <= -2.0


def test_write_and_reload_round_trip():
    g = generate_synthetic("power-law", 50, rng_seed=2)
    edges, econ = io.StringIO(), io.StringIO()
    write_edge_list(g, edges, with_probs=True)
    write_economics(g, econ)
    h = load_edge_list(edges.getvalue(), econ.getvalue())
    assert h.n_nodes == g.n_nodes
    assert np.array_equal(h.targets, g.targets)
    assert np.array_equal(h.probs, g.probs)
    assert np.array_equal(h.benefit, g.benefit)
    assert np.array_equal(h.max_constraint, g.max_constraint)


def test_deployment_value_semantics():
    d = Deployment({1, 0}, {0: 2, 3: 0})
    assert d.internals == frozenset({0})
    assert d == Deployment([0, 1], {0: 2})
    assert hash(d) == hash(Deployment([0, 1], {0: 2}))
    with pytest.raises(AttributeError):
        d.seeds = frozenset()
    with pytest.raises(ValueError):
        Deployment({0}, {0: -1})


def test_deployment_validate():
    g = SocialGraph.build(2, [(0, 1, 0.5)])
    Deployment({0}, {0: 1}).validate(g)
    with pytest.raises(ValueError):
        Deployment({0}, {0: 2}).validate(g)
    with pytest.raises(ValueError):
        Deployment({5}).validate(g)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6), st.floats(0, 1)), max_size=25))
def test_adjacency_is_total_order(edges):
    edges = [e for e in edges if e[0] != e[1]]
    g = SocialGraph.build(7, edges)
    for v in range(7):
        nb = g.sorted_out_neighbors(v)
        assert nb == sorted(nb, key=lambda tp: (-tp[1], tp[0]))
        assert len({t for t, _ in nb}) == len(nb)
