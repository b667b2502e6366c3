"""Guaranteed paths.

For a seed ``s`` a guaranteed path to ``v`` is the coupon allocation that
lets a specific chain of friends carry activation from ``s`` to ``v`` with
no competition for coupons.  Every user on the chain holds one coupon per
already visited friend ranked at or above the next user on the chain, since
any of those could redeem first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graph import Deployment, SocialGraph
from .propagation import MonteCarloEstimator, expected_sc_cost

SLACK = 1e-9


@dataclass
class GuaranteedPath:
    seed: int
    terminal: int
    chain: tuple  # seed ... terminal
    members: frozenset
    guaranteed_allocation: dict
    guaranteed_cost: float
    expected_benefit: float
    parent_path: "GuaranteedPath | None" = field(default=None, repr=False)

    @property
    def depth(self) -> int:
        return len(self.chain) - 1

    @property
    def terminal_parent(self) -> int | None:
        return self.chain[-2] if len(self.chain) > 1 else None

    def prefix(self, node: int) -> "GuaranteedPath":
        """The recorded path that ends at ``node``, an ascendant on the chain."""
        gp = self
        while gp is not None and gp.terminal != node:
            gp = gp.parent_path
        if gp is None:
            raise KeyError(f"{node} is not on the chain of {self.terminal}")
        return gp


def _visited_up_to(graph: SocialGraph, x: int, y: int, visited) -> list[int]:
    """Friends of ``x`` ranked at or above ``y`` that are already visited
    (``y`` itself included)."""
    out = []
    for t, p in graph.sorted_out_neighbors(x):
        if p > 0.0 and (t in visited or t == y):
            out.append(t)
        if t == y:
            break
    return out


def _seed_paths(graph: SocialGraph, s: int, limit: float, estimator) -> list[GuaranteedPath]:
    root = GuaranteedPath(s, s, (s,), frozenset({s}), {}, 0.0, estimator.benefit(graph, {s}, {}))
    found = [root]
    visited = {s}
    stack = [(root, iter(graph.sorted_out_neighbors(s)))]
    while stack:
        gp, it = stack[-1]
        u = gp.terminal
        nxt = None
        for t, p in it:
            if p > 0.0 and t not in visited:
                nxt = t
                break
        if nxt is None:
            stack.pop()
            continue
        # every visited friend ranked above the next user on the chain may
        # redeem first, so each chain user needs one coupon per such friend
        chain = gp.chain + (nxt,)
        members = set(chain)
        alloc = {}
        for x, y in zip(chain, chain[1:]):
            friends = _visited_up_to(graph, x, y, visited)
            members.update(friends)
            alloc[x] = len(friends)
        if alloc[u] > graph.max_constraint[u]:
            stack.pop()
            continue
        cost = expected_sc_cost(graph, alloc)
        if cost > limit + SLACK:
            # the rest of u's friends rank lower and only cost more
            stack.pop()
            continue
        visited.add(nxt)
        child = GuaranteedPath(s, nxt, chain, frozenset(members), alloc, cost,
                               estimator.benefit(graph, {s}, alloc), gp)
        found.append(child)
        stack.append((child, iter(graph.sorted_out_neighbors(nxt))))
    return found


def identify_guaranteed_paths(graph: SocialGraph, deployment: Deployment, budget: float,
                              estimator=None) -> list[GuaranteedPath]:
    """All guaranteed paths from the seeds of ``deployment``, in seed then DFS order.

    A path is kept only when its guaranteed SC cost fits in what the budget
    leaves after the seed's own cost.  A seed that alone exceeds the budget
    yields nothing.
    """
    if estimator is None:
        estimator = MonteCarloEstimator()
    paths: list[GuaranteedPath] = []
    for s in sorted(deployment.seeds):
        limit = budget - float(graph.seed_cost[s])
        if limit < -SLACK:
            continue
        paths.extend(_seed_paths(graph, s, limit, estimator))
    return paths
