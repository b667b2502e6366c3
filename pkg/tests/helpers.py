"""Fixture graphs shared by the unit and acceptance tests."""

import numpy as np

from socialcoupon.graph import INFINITE_COST, SocialGraph

# v1..v7 -> 0..6.  v1 is the only seed candidate (free), everything else unit.
G_ID_EDGES = [(0, 1, 0.6), (0, 2, 0.4), (1, 3, 0.5), (1, 4, 0.4), (2, 5, 0.8), (2, 6, 0.7)]


def g_id() -> SocialGraph:
    return SocialGraph.build(7, G_ID_EDGES, seed_cost=[0.0] + [INFINITE_COST] * 6)


def g_id_extended() -> SocialGraph:
    """G_ID plus a user v8 below v4 and two high-benefit, cheap users below v8
    (ids 7, 8, 9), so a guaranteed path worth creating hangs off v4."""
    edges = G_ID_EDGES + [(3, 7, 0.9), (7, 8, 0.9), (7, 9, 0.8)]
    return SocialGraph.build(
        10, edges,
        benefit=[1] * 7 + [5, 50, 50],
        sc_cost=[1] * 8 + [0.1, 0.1],
        seed_cost=[0.0] + [INFINITE_COST] * 9,
    )


def three_seed() -> SocialGraph:
    """Eight users; v1, v2, v3 (ids 0, 1, 2) can be seeded.

    v1 -> v4 (0.55), v2 (0.5); v4 -> v5 (0.9); v2 -> v6 (0.4);
    v3 -> v7 (0.7), v8 (0.5).
    """
    edges = [(0, 3, 0.55), (0, 1, 0.5), (3, 4, 0.9), (1, 5, 0.4), (2, 6, 0.7), (2, 7, 0.5)]
    return SocialGraph.build(
        8, edges,
        benefit=[3, 3, 3, 3, 6, 4.2, 3, 3],
        sc_cost=[1, 1, 1, 1, 1, 2.75, 1, 1],
        seed_cost=[1, 1, 1.5] + [INFINITE_COST] * 5,
    )


THREE_SEED_BUDGET = 3.5

_PROBS = (0.2, 0.3, 0.5, 0.6, 0.8, 1.0)


def random_graph(rng: np.random.Generator, n: int, max_edges: int, seedable: int | None = None) -> SocialGraph:
    """Random sparse graph with bounded economics ratios.

    Benefits lie in [1, 4] and costs in [0.5, 2], so b0 <= 4 and c0 <= 4.
    Only the first ``seedable`` users (all by default) have finite seed cost.
    """
    pairs = [(a, b) for a in range(n) for b in range(n) if a != b]
    m = int(rng.integers(1, max_edges + 1))
    chosen = rng.choice(len(pairs), size=min(m, len(pairs)), replace=False)
    edges = [(pairs[i][0], pairs[i][1], float(rng.choice(_PROBS))) for i in chosen]
    seed_cost = rng.uniform(0.5, 2.0, n).round(2)
    if seedable is not None:
        seed_cost[seedable:] = INFINITE_COST
    return SocialGraph.build(
        n, edges,
        benefit=rng.uniform(1.0, 4.0, n).round(2),
        seed_cost=seed_cost,
        sc_cost=rng.uniform(0.5, 2.0, n).round(2),
    )


# PASS/FAIL lines from the acceptance suite, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []
