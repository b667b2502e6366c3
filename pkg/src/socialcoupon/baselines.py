"""Comparison algorithms: greedy influence and profit maximization under a
fixed coupon strategy, plus the two-stage shortest-path heuristic (IM-S)."""

from __future__ import annotations

import heapq
import math
import re
from dataclasses import dataclass

import networkx as nx

from .graph import INFINITE_COST, Deployment, SocialGraph
from .propagation import possibly_active, total_cost

SLACK = 1e-9
DEFAULT_LIMIT = 32


@dataclass(frozen=True)
class CouponStrategy:
    """How many coupons each chosen user receives.

    ``scope="seeds"`` hands coupons to the seeds only, so seeds reward their
    own friends and the spread stops there.  ``scope="reachable"`` also
    equips every user the seeds can reach, transitively.
    """

    kind: str = "unlimited"
    k: int = 0
    scope: str = "seeds"

    def __post_init__(self):
        if self.kind not in ("limited", "unlimited"):
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if self.kind == "limited" and self.k < 0:
            raise ValueError("limited strategy needs k >= 0")
        if self.scope not in ("seeds", "reachable"):
            raise ValueError(f"unknown scope {self.scope!r}")

    @classmethod
    def limited(cls, k: int, scope: str = "seeds") -> "CouponStrategy":
        return cls("limited", k, scope)

    @classmethod
    def unlimited(cls, scope: str = "seeds") -> "CouponStrategy":
        return cls("unlimited", 0, scope)

    def coupons_for(self, graph: SocialGraph, v: int) -> int:
        deg = graph.out_degree(v)
        k = deg if self.kind == "unlimited" else min(self.k, deg)
        return min(k, int(graph.max_constraint[v]))


def apply_coupon_strategy(graph: SocialGraph, nodes, strategy: CouponStrategy) -> dict:
    alloc = {}
    pending = sorted(set(nodes))
    seen = set(pending)
    while pending:
        for v in pending:
            k = strategy.coupons_for(graph, v)
            if k > 0:
                alloc[v] = k
        if strategy.scope == "seeds":
            break
        fresh = possibly_active(graph, seen, alloc) - seen
        seen |= fresh
        pending = sorted(fresh)
    return alloc


def strategy_deployment(graph: SocialGraph, seeds, strategy: CouponStrategy) -> Deployment:
    return Deployment(seeds, apply_coupon_strategy(graph, seeds, strategy))


def greedy_seed_selection(graph: SocialGraph, size: int, objective: str, strategy: CouponStrategy,
                          estimator, budget: float | None = None) -> list[int]:
    """Lazy-greedy (CELF) seed selection, returned in pick order.

    ``objective`` is ``"influence"`` (expected benefit) or ``"profit"``
    (expected benefit minus seed cost; stops once the best gain is not
    positive).  Users carrying the sentinel seed cost are never seeds, and
    with a ``budget`` neither are users whose seed cost alone exceeds it.
    A pick that would break the budget is skipped and the next best user
    is tried, so every prefix of the result is affordable.
    """
    if objective not in ("influence", "profit"):
        raise ValueError(f"unknown objective {objective!r}")
    if not 0 <= size <= graph.n_nodes:
        raise ValueError(f"size {size} outside 0..{graph.n_nodes}")
    chosen: list[int] = []
    if size == 0:
        return chosen

    def value(seeds):
        return estimator.benefit(graph, seeds, apply_coupon_strategy(graph, seeds, strategy))

    def gain(v):
        g = value(chosen + [v]) - current
        if objective == "profit":
            g -= float(graph.seed_cost[v])
        return g

    current = 0.0
    heap = []
    for v in range(graph.n_nodes):
        if graph.seed_cost[v] >= INFINITE_COST:
            continue
        if budget is not None and graph.seed_cost[v] > budget + SLACK:
            continue
        heap.append((-gain(v), v, 0))
    heapq.heapify(heap)
    while heap and len(chosen) < size:
        neg, v, stamp = heapq.heappop(heap)
        if stamp != len(chosen):
            heapq.heappush(heap, (-gain(v), v, len(chosen)))
            continue
        if objective == "profit" and not -neg > 0:
            break
        if budget is not None and total_cost(graph, strategy_deployment(graph, chosen + [v], strategy)) > budget + SLACK:
            continue
        chosen.append(v)
        current = value(chosen)
    return chosen


def sweep_sizes(n: int) -> list[int]:
    return sorted({math.ceil(n / 2 ** i) for i in range(11)})


_VARIANT = re.compile(r"^(IM|PM)-(U|L)(?:\((\d+)\))?$")


def parse_variant(variant: str, scope: str = "seeds") -> tuple[str, CouponStrategy]:
    m = _VARIANT.match(variant.strip())
    if not m:
        raise ValueError(f"unknown baseline variant {variant!r}")
    family, kind, k = m.groups()
    if kind == "U":
        if k is not None:
            raise ValueError(f"{variant}: unlimited strategy takes no limit")
        strategy = CouponStrategy.unlimited(scope)
    else:
        strategy = CouponStrategy.limited(int(k) if k else DEFAULT_LIMIT, scope)
    return ("influence" if family == "IM" else "profit"), strategy


def baseline_run(graph: SocialGraph, budget: float, variant: str, estimator,
                 scope: str = "seeds") -> Deployment:
    """IM-U, IM-L, PM-U or PM-L (``IM-L(8)`` sets the limit, default 32).

    IM variants try the seed counts ceil(|V|/2^n), n = 0..10, on the greedy
    order and keep the feasible one with the largest benefit.  PM variants
    run the profit greedy until no positive gain fits in the budget.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    objective, strategy = parse_variant(variant, scope)
    order = greedy_seed_selection(graph, graph.n_nodes, objective, strategy, estimator, budget)
    if objective == "profit":
        return strategy_deployment(graph, order, strategy)
    best, best_value = Deployment(), -math.inf
    for size in sweep_sizes(graph.n_nodes):
        if size > len(order):
            continue
        dep = strategy_deployment(graph, order[:size], strategy)
        if total_cost(graph, dep) > budget + SLACK:
            continue
        b = estimator.benefit(graph, dep.seeds, dep.allocation)
        if b > best_value:
            best, best_value = dep, b
    return best


def _path_nodes(graph: SocialGraph, seeds) -> list[int]:
    """Seeds plus users on shortest paths between seed pairs (weight 1 - p),
    ordered by distance from the nearest seed, then id."""
    g = nx.DiGraph()
    g.add_nodes_from(range(graph.n_nodes))
    for u, v, p in graph.edges():
        g.add_edge(u, v, weight=1.0 - p)
    seeds = sorted(seeds)
    on_path = set(seeds)
    for s in seeds:
        _, paths = nx.single_source_dijkstra(g, s, weight="weight")
        for t in seeds:
            if t != s and t in paths:
                on_path.update(paths[t])
    dist = nx.multi_source_dijkstra_path_length(g, set(seeds), weight="weight")
    return sorted(on_path, key=lambda v: (dist.get(v, math.inf), v))


def baseline_im_s(graph: SocialGraph, budget: float, estimator) -> Deployment:
    """Seeds from IM-U; coupons dealt round-robin, one per round, to the
    users on shortest paths joining the seeds, until the next coupon would
    break the budget."""
    seeds = sorted(baseline_run(graph, budget, "IM-U", estimator).seeds)
    if not seeds:
        return Deployment()
    order = _path_nodes(graph, seeds)
    cap = {v: min(int(graph.max_constraint[v]), graph.out_degree(v)) for v in order}
    alloc: dict[int, int] = {}
    progress = True
    while progress:
        progress = False
        for v in order:
            if alloc.get(v, 0) >= cap[v]:
                continue
            trial = {**alloc, v: alloc.get(v, 0) + 1}
            if total_cost(graph, Deployment(seeds, trial)) > budget + SLACK:
                return Deployment(seeds, alloc)
            alloc = trial
            progress = True
    return Deployment(seeds, alloc)
