"""Brute-force references for tiny instances.

The exact benefit here does not share code with the Monte Carlo path: it
replays the cascade against a partial edge realization and branches on each
coin the first time the cascade asks for it, which is the full 2^|E| sum with
the never-consulted edges marginalized out.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .graph import INFINITE_COST, Deployment, SocialGraph
from .propagation import expected_sc_cost, possibly_active, seed_cost_of


class InstanceTooLarge(ValueError):
    pass


def _replay(adjacency, benefit, seeds, alloc, fixed):
    """Run one cascade using ``fixed`` coin outcomes.

    Returns ``(benefit, None)`` when finished or ``(None, edge)`` for the first
    coin that is not yet fixed.
    """
    active = set(seeds)
    gained = [benefit[s] for s in sorted(seeds)]
    layer = sorted(seeds)
    while layer:
        new = []
        for u in layer:
            budget = alloc.get(u, 0)
            for edge, v, p in adjacency[u]:
                if budget == 0:
                    break
                if v in active:
                    continue
                if p >= 1.0:
                    live = True
                elif p <= 0.0:
                    live = False
                elif edge in fixed:
                    live = fixed[edge]
                else:
                    return None, edge
                if live:
                    active.add(v)
                    new.append(v)
                    gained.append(benefit[v])
                    budget -= 1
        layer = sorted(new)
    return math.fsum(gained), None


def exact_expected_benefit(graph: SocialGraph, deployment: Deployment, max_edges: int = 20) -> float:
    """Exact expected benefit by enumerating edge realizations.

    Only edges leaving users that hold coupons can matter, so the size guard
    counts those.
    """
    if not deployment.seeds:
        return 0.0
    alloc = dict(deployment.allocation)
    relevant = sum(graph.out_degree(v) for v, k in alloc.items() if k > 0)
    if relevant > max_edges:
        raise InstanceTooLarge(f"{relevant} candidate edges exceeds the limit of {max_edges}")
    adjacency = []
    e = 0
    for v in range(graph.n_nodes):
        row = []
        for t, p in graph.sorted_out_neighbors(v):
            row.append((e, t, p))
            e += 1
        adjacency.append(row)
    probs = graph.probs.tolist()
    benefit = graph.benefit.tolist()
    seeds = sorted(deployment.seeds)

    terms = []
    stack = [({}, 1.0)]
    while stack:
        fixed, weight = stack.pop()
        value, edge = _replay(adjacency, benefit, seeds, alloc, fixed)
        if edge is None:
            terms.append(weight * value)
            continue
        p = probs[edge]
        stack.append(({**fixed, edge: False}, weight * (1.0 - p)))
        stack.append(({**fixed, edge: True}, weight * p))
    return math.fsum(terms)


class ExactEstimator:
    """Drop-in replacement for the Monte Carlo estimator on tiny graphs."""

    def __init__(self, max_edges: int = 20):
        self.max_edges = max_edges
        self._cache: dict = {}

    def benefit(self, graph: SocialGraph, seeds: Iterable[int], allocation: Mapping[int, int]) -> float:
        seeds = frozenset(seeds)
        key = (graph, seeds, frozenset((v, k) for v, k in allocation.items() if k > 0))
        hit = self._cache.get(key)
        if hit is None:
            hit = exact_expected_benefit(graph, Deployment(seeds, allocation), self.max_edges)
            self._cache[key] = hit
        return hit

    def clear(self) -> None:
        self._cache.clear()

    def __repr__(self):
        return "ExactEstimator()"


def optimal_deployment(graph: SocialGraph, budget: float, max_nodes: int = 8,
                       max_allocations: int = 50_000) -> tuple[Deployment, float]:
    """Exhaustive maximum redemption rate under the budget.

    Allocations at users that cannot be reached only add cost, so for each
    seed set the search ranges over users reachable when everyone holds their
    maximum number of coupons.
    """
    n = graph.n_nodes
    if n > max_nodes:
        raise InstanceTooLarge(f"{n} nodes exceeds the limit of {max_nodes}")
    holders = [v for v in range(n) if graph.max_constraint[v] > 0]
    space = math.prod(int(graph.max_constraint[v]) + 1 for v in holders)
    if space > max_allocations:
        raise InstanceTooLarge(f"{space} allocation vectors exceeds the limit of {max_allocations}")
    full = {v: int(graph.max_constraint[v]) for v in holders}
    estimator = ExactEstimator(max_edges=graph.n_edges)

    best, best_rate = Deployment(), 0.0
    slack = 1e-9
    for size in range(1, n + 1):
        for seeds in itertools.combinations(range(n), size):
            seed_cost = seed_cost_of(graph, seeds)
            if seed_cost > budget + slack:
                continue
            reach = sorted(possibly_active(graph, seeds, full) & set(holders))
            ranges = [range(int(graph.max_constraint[v]) + 1) for v in reach]
            for counts in itertools.product(*ranges):
                alloc = {v: k for v, k in zip(reach, counts) if k}
                cost = seed_cost + expected_sc_cost(graph, alloc)
                if cost > budget + slack:
                    continue
                if alloc and not set(alloc) <= possibly_active(graph, seeds, alloc):
                    continue
                value = estimator.benefit(graph, seeds, alloc)
                if cost <= 0:
                    rate = math.inf if value > 0 else 0.0
                else:
                    rate = value / cost
                if rate > best_rate:
                    best, best_rate = Deployment(seeds, alloc), rate
    return best, best_rate


@dataclass(frozen=True)
class ApproxBoundInputs:
    b0: float
    c0: float
    epsilon: float = 0.0

    def __post_init__(self):
        if self.b0 < 1 or self.c0 < 1:
            raise ValueError("b0 and c0 are max/min ratios and must be >= 1")
        if not 0 <= self.epsilon < 1:
            raise ValueError("epsilon must lie in [0, 1)")


def approximation_bound(inputs: ApproxBoundInputs) -> float:
    """Worst-case fraction of the optimal redemption rate: 1 - exp(-1/(b0*c0)) - eps."""
    if math.isinf(inputs.b0) or math.isinf(inputs.c0):
        return -inputs.epsilon
    return 1.0 - math.exp(-1.0 / (inputs.b0 * inputs.c0)) - inputs.epsilon


def bound_inputs(graph: SocialGraph, epsilon: float = 0.0) -> ApproxBoundInputs:
    """b0 and c0 over the users in ``graph``; sentinel seed costs are ignored."""
    benefits = graph.benefit.tolist()
    costs = [c for c in graph.seed_cost.tolist() if c < INFINITE_COST] + graph.sc_cost.tolist()

    def ratio(values):
        lo, hi = min(values, default=0.0), max(values, default=0.0)
        if hi == 0.0:
            return 1.0
        return math.inf if lo == 0.0 else hi / lo

    return ApproxBoundInputs(ratio(benefits), ratio(costs), epsilon)
