import math

import numpy as np
import pytest

from socialcoupon.graph import Deployment, SocialGraph
from socialcoupon.oracle import ExactEstimator, exact_expected_benefit
from socialcoupon.paths import identify_guaranteed_paths

import helpers


def _by_terminal(paths):
    return {gp.terminal: gp for gp in paths}


def test_members_include_visited_siblings_of_ascendants(exact):
    # v1..v7 -> 1..7: v1 -> v2, v3; v2 -> v4, v5; v5 -> v6, v7 (left child first)
    g = SocialGraph.build(8, [(1, 2, 0.9), (1, 3, 0.5), (2, 4, 0.9), (2, 5, 0.5), (5, 6, 0.9), (5, 7, 0.5)])
    gp = _by_terminal(identify_guaranteed_paths(g, Deployment({1}), 100.0, exact))[7]
    assert gp.members == {1, 2, 4, 5, 6, 7}
    assert gp.chain == (1, 2, 5, 7)
    assert gp.guaranteed_allocation == {1: 1, 2: 2, 5: 2}


def test_budget_equal_to_seed_cost_gives_trivial_path(gid, exact):
    paths = identify_guaranteed_paths(gid, Deployment({0}), 0.0, exact)
    assert len(paths) == 1
    assert paths[0].members == {0} and paths[0].guaranteed_cost == 0.0


def test_deterministic_chain(exact):
    g = SocialGraph.build(3, [(0, 1, 1.0), (1, 2, 1.0)], seed_cost=[1, 1, 1])
    paths = identify_guaranteed_paths(g, Deployment({0}), 3.0, exact)
    assert [set(p.members) for p in paths] == [{0}, {0, 1}, {0, 1, 2}]
    assert [p.guaranteed_cost for p in paths] == [0.0, 1.0, 2.0]


def test_gid_path_to_v4(gid, exact):
    gp = _by_terminal(identify_guaranteed_paths(gid, Deployment({0}), 10.0, exact))[3]
    assert gp.guaranteed_cost == pytest.approx(1.46, abs=1e-12)
    assert gp.expected_benefit == pytest.approx(2.18, abs=1e-12)


def test_expensive_child_prunes_lower_siblings(exact):
    # 0 -> 1 (cheap), 0 -> 2 (costly), 0 -> 3 would fit alone but ranks lower
    g = SocialGraph.build(4, [(0, 1, 0.9), (0, 2, 0.8), (0, 3, 0.1)], sc_cost=[1, 1, 50, 0.1])
    # seed cost 1 leaves 5; reaching 1 prices 0.9 + 0.1*0.8*50 + ... ~ 4.9
    terminals = {p.terminal for p in identify_guaranteed_paths(g, Deployment({0}), 6.0, exact)}
    assert terminals == {0, 1}
    cheap = g.with_economics(sc_cost=np.array([1, 1, 1, 0.1]))
    terminals = {p.terminal for p in identify_guaranteed_paths(cheap, Deployment({0}), 6.0, exact)}
    assert terminals == {0, 1, 2, 3}


def test_max_constraint_caps_visited_children(exact):
    g = SocialGraph.build(3, [(0, 1, 0.9), (0, 2, 0.8)], max_constraint=[1, 0, 0])
    terminals = {p.terminal for p in identify_guaranteed_paths(g, Deployment({0}), 10.0, exact)}
    assert terminals == {0, 1}


def test_unaffordable_seed_yields_nothing(gid, exact):
    g = gid.with_economics(seed_cost=np.full(7, 5.0))
    assert identify_guaranteed_paths(g, Deployment({0}), 1.0, exact) == []


def test_seeds_are_traversed_independently(exact):
    g = SocialGraph.build(3, [(0, 2, 1.0), (1, 2, 1.0)])
    paths = identify_guaranteed_paths(g, Deployment({0, 1}), 5.0, exact)
    assert [(p.seed, p.terminal) for p in paths] == [(0, 0), (0, 2), (1, 1), (1, 2)]


def _random_tree(rng, n):
    edges = [(int(rng.integers(0, v)), v, float(rng.choice([0.3, 0.5, 0.7, 0.9]))) for v in range(1, n)]
    return SocialGraph.build(n, edges, sc_cost=rng.uniform(0.2, 1.5, n).round(2),
                             benefit=rng.uniform(1, 3, n).round(2), seed_cost=0.5)


@pytest.mark.parametrize("kind", ["tree", "general"])
def test_invariants_on_random_graphs(kind):
    rng = np.random.default_rng(21)
    exact = ExactEstimator(max_edges=40)
    for _ in range(30):
        g = _random_tree(rng, 7) if kind == "tree" else helpers.random_graph(rng, 7, 12)
        budget = float(rng.uniform(1.0, 5.0))
        paths = identify_guaranteed_paths(g, Deployment({0}), budget, exact)
        keyed = {(p.seed, p.terminal): p for p in paths}
        for p in paths:
            assert p.seed in p.members and p.terminal in p.members
            assert p.guaranteed_cost <= budget - g.seed_cost[0] + 1e-9
            assert set(p.guaranteed_allocation) == set(p.chain[:-1])
            if p.parent_path is not None:
                parent = keyed[(p.seed, p.chain[-2])]
                assert parent is p.parent_path
                assert parent.guaranteed_cost <= p.guaranteed_cost + 1e-12
            # coupon supply covers every visited child, so the chain alone reaches the
            # terminal with the product of its probabilities; other routes only add to it
            indicator = np.zeros(g.n_nodes)
            indicator[p.terminal] = 1.0
            h = g.with_economics(benefit=indicator)
            reach = exact_expected_benefit(h, Deployment({p.seed}, p.guaranteed_allocation), max_edges=40)
            probs = dict(((u, v), q) for u, v, q in g.edges())
            expected = math.prod(probs[(a, b)] for a, b in zip(p.chain, p.chain[1:]))
            if kind == "tree":
                assert reach == pytest.approx(expected, abs=1e-12)
            else:
                assert reach >= expected - 1e-12


def test_guaranteed_cost_equals_coupon_count_when_certain(exact):
    g = SocialGraph.build(5, [(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0), (2, 4, 1.0)])
    for p in identify_guaranteed_paths(g, Deployment({0}), 10.0, exact):
        assert p.guaranteed_cost == sum(p.guaranteed_allocation.values())


def test_friend_visited_through_another_branch_still_needs_a_coupon(exact):
    # 0 -> 1 (0.9), 2 (0.6), 3 (0.5); 1 -> 2 (0.9).  2 is first reached via 1,
    # yet it still outranks 3 among 0's friends.
    g = SocialGraph.build(4, [(0, 1, 0.9), (0, 2, 0.6), (0, 3, 0.5), (1, 2, 0.9)])
    gp = _by_terminal(identify_guaranteed_paths(g, Deployment({0}), 50.0, exact))[3]
    assert gp.guaranteed_allocation == {0: 3}
    assert gp.members == {0, 1, 2, 3}
    h = g.with_economics(benefit=np.array([0.0, 0, 0, 1]))
    assert exact_expected_benefit(h, Deployment({0}, gp.guaranteed_allocation)) == pytest.approx(0.5)
