"""Investment deployment: marginal redemption, pivot queue and the greedy
seed / coupon investment loop."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from .graph import Deployment, SocialGraph
from .propagation import (
    expected_sc_cost,
    node_coupon_cost,
    possibly_active,
    redemption_rate,
    seed_cost_of,
)

SLACK = 1e-9


def _ratio(gain: float, cost: float) -> float:
    if cost > 0:
        return gain / cost
    if gain > 0:
        return math.inf
    raise ZeroDivisionError("zero cost increment with no benefit gain")


@dataclass(frozen=True)
class MarginalRedemption:
    value: float
    mode: str  # "seed" or "coupon"
    target: int


@dataclass(frozen=True)
class QueueEntry:
    node: int
    coupons: int
    key: float


@dataclass
class IdState:
    candidate_seeds: set = field(default_factory=set)
    allocation: dict = field(default_factory=dict)
    gamma: dict = field(default_factory=dict)
    pivot_queue: list = field(default_factory=list)
    history: list = field(default_factory=list)

    @property
    def candidate_internals(self) -> set:
        return {v for v, k in self.allocation.items() if k > 0}

    def deployment(self) -> Deployment:
        return Deployment(self.candidate_seeds, self.allocation)


def _seed_mr(graph, estimator, seeds, alloc, v) -> float:
    gain = estimator.benefit(graph, seeds | {v}, alloc) - estimator.benefit(graph, seeds, alloc)
    return _ratio(gain, float(graph.seed_cost[v]))


def _coupon_mr(graph, estimator, seeds, alloc, v) -> float:
    k = alloc.get(v, 0)
    bumped = {**alloc, v: k + 1}
    gain = estimator.benefit(graph, seeds, bumped) - estimator.benefit(graph, seeds, alloc)
    return _ratio(gain, node_coupon_cost(graph, v, k + 1) - node_coupon_cost(graph, v, k))


def marginal_redemption(state: IdState, v: int, graph: SocialGraph, estimator,
                        mode: str | None = None) -> MarginalRedemption:
    """MR of seeding ``v`` or of one more coupon for ``v``.

    The mode follows ``state.gamma`` (1 means ``v`` has not been picked as a
    seed yet) unless given explicitly.  A zero cost increment with positive
    gain is infinitely attractive; with no gain it is an error.
    """
    seeds = frozenset(state.candidate_seeds)
    alloc = dict(state.allocation)
    if mode is None:
        mode = "seed" if state.gamma.get(v, 1) == 1 else "coupon"
    if mode not in ("seed", "coupon"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "seed":
        return MarginalRedemption(_seed_mr(graph, estimator, seeds, alloc, v), "seed", v)
    if alloc.get(v, 0) >= graph.max_constraint[v]:
        raise ValueError(f"node {v} is already at its coupon limit")
    return MarginalRedemption(_coupon_mr(graph, estimator, seeds, alloc, v), "coupon", v)


def _rank(graph, value, v):
    # larger is better: MR, then benefit, then smaller id
    return (value, float(graph.benefit[v]), -v)


def _standalone_rate(graph, estimator, v, k) -> float:
    alloc = {v: k} if k else {}
    b = estimator.benefit(graph, {v}, alloc)
    cost = float(graph.seed_cost[v]) + node_coupon_cost(graph, v, k)
    return float(_ratio(b, cost)) if b > 0 or cost > 0 else 0.0


def build_pivot_queue(graph: SocialGraph, budget: float, estimator) -> IdState:
    """Rank every user as a stand-alone seed, optionally holding one coupon.

    A user enters the queue when seeding it alone has positive MR and fits the
    budget; it is granted its first coupon when that coupon's MR is positive
    and seed plus coupon still fit.  Each user is evaluated on its own, so
    the outcome does not depend on the order the greedy picks them in.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    state = IdState(gamma={v: 1 for v in range(graph.n_nodes)})
    entries = []
    empty = frozenset()
    for v in range(graph.n_nodes):
        c_seed = float(graph.seed_cost[v])
        if c_seed > budget + SLACK:
            continue
        try:
            mr = _seed_mr(graph, estimator, empty, {}, v)
        except ZeroDivisionError:
            continue
        if not mr > 0:
            continue
        state.gamma[v] = 0
        k = 0
        if graph.max_constraint[v] >= 1 and c_seed + node_coupon_cost(graph, v, 1) <= budget + SLACK:
            try:
                if _coupon_mr(graph, estimator, frozenset({v}), {}, v) > 0:
                    k = 1
            except ZeroDivisionError:
                pass
        entries.append(QueueEntry(v, k, _standalone_rate(graph, estimator, v, k)))
    entries.sort(key=lambda e: _rank(graph, e.key, e.node), reverse=True)
    state.pivot_queue = entries
    return state


def deploy_investment(graph: SocialGraph, budget: float, estimator,
                      state: IdState | None = None) -> tuple[Deployment, list[Deployment]]:
    """Greedy investment loop; returns the best snapshot and all snapshots.

    Each round compares one more coupon for a current internal user
    (broaden), a first coupon for an influenced non-internal user (deepen)
    and the pivot source's stand-alone rate (new seed).  Once the queue runs
    dry only the coupon strategies remain, and the loop ends when no positive
    MR fits in the budget.
    """
    if state is None:
        state = build_pivot_queue(graph, budget, estimator)
    queue = deque(state.pivot_queue)
    if not queue:
        return Deployment(), []

    first = queue.popleft()
    seeds = {first.node}
    alloc = {first.node: first.coupons} if first.coupons else {}
    state.candidate_seeds, state.allocation = seeds, alloc
    history = [Deployment(seeds, alloc)]
    pivot = queue.popleft() if queue else None

    while True:
        seed_total = seed_cost_of(graph, seeds)
        sc_total = expected_sc_cost(graph, alloc)
        frozen = frozenset(seeds)
        base = estimator.benefit(graph, frozen, alloc)

        # a coupon must beat the pivot's rate strictly, so the pivot keeps ties
        floor = pivot.key if pivot is not None else 0.0
        best_rank = None
        choice = None

        influenced = possibly_active(graph, seeds, alloc)
        candidates = sorted(set(alloc) | {v for v in influenced if v not in alloc})
        for v in candidates:
            k = alloc.get(v, 0)
            if k >= graph.max_constraint[v]:
                continue
            d_cost = node_coupon_cost(graph, v, k + 1) - node_coupon_cost(graph, v, k)
            if seed_total + sc_total + d_cost > budget + SLACK:
                continue
            bumped = {**alloc, v: k + 1}
            gain = estimator.benefit(graph, frozen, bumped) - base
            try:
                tau = _ratio(gain, d_cost)
            except ZeroDivisionError:
                continue
            if not tau > floor:
                continue
            rank = _rank(graph, tau, v)
            if best_rank is None or rank > best_rank:
                best_rank, choice = rank, v

        if choice is None:
            choice = pivot
        if choice is None:
            break
        if choice is pivot:
            p = pivot.node
            new_alloc = dict(alloc)
            if pivot.coupons:
                new_alloc[p] = max(new_alloc.get(p, 0), pivot.coupons)
            pivot = queue.popleft() if queue else None
            if seed_total + graph.seed_cost[p] + expected_sc_cost(graph, new_alloc) > budget + SLACK:
                continue
            seeds = seeds | {p}
            alloc = new_alloc
        else:
            alloc = {**alloc, choice: alloc.get(choice, 0) + 1}
        state.candidate_seeds, state.allocation = seeds, alloc
        history.append(Deployment(seeds, alloc))

    state.history = history
    best = max(history, key=lambda d: rate_of(graph, estimator, d))
    return best, history


def rate_of(graph: SocialGraph, estimator, deployment: Deployment) -> float:
    try:
        return redemption_rate(graph, deployment, estimator.benefit(graph, deployment.seeds, deployment.allocation))
    except ZeroDivisionError:
        return math.inf
