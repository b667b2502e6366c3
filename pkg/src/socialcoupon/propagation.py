"""Independent cascade with per-user coupon limits.

An active user walks its friends from the highest to the lowest influence
probability and flips one coin per still-inactive friend; every success hands
out one coupon and activates that friend.  A user holding ``k`` coupons stops
after ``k`` redemptions.  Propagation is breadth-first by hop, and inside a
hop users are processed in ascending id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels
from .graph import Deployment, SocialGraph


def coupon_tail_prob(ordered_probs: Sequence[float], k: int, j: int) -> float:
    """Probability that the friend ranked ``j`` (1-based) still finds a coupon.

    That is 1 when ``j <= k``; otherwise the probability that at most ``k-1``
    of the friends ranked ``1..j-1`` redeem, by the Poisson-binomial DP.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if not 1 <= j <= len(ordered_probs) + 1:
        raise ValueError(f"rank {j} out of range")
    for p in ordered_probs:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probability {p} outside [0, 1]")
    if j <= k:
        return 1.0
    if k == 0:
        return 0.0
    # dist[c] = Pr[c successes so far], c < k
    dist = [1.0] + [0.0] * (k - 1)
    for p in ordered_probs[: j - 1]:
        q = 1.0 - p
        for c in range(k - 1, 0, -1):
            dist[c] = dist[c] * q + dist[c - 1] * p
        dist[0] *= q
    return math.fsum(dist)


def node_coupon_cost(graph: SocialGraph, v: int, k: int) -> float:
    """Expected SC cost of ``v`` holding ``k`` coupons (independent of v's own activation)."""
    if k <= 0:
        return 0.0
    cache = graph._cost_cache
    key = (v, k)
    hit = cache.get(key)
    if hit is not None:
        return hit
    targets, probs = graph.neighbor_slice(v)
    dist = [1.0] + [0.0] * (k - 1)
    total = 0.0
    for rank, (t, p) in enumerate(zip(targets.tolist(), probs.tolist()), start=1):
        tail = 1.0 if rank <= k else math.fsum(dist)
        total += graph.sc_cost[t] * p * tail
        q = 1.0 - p
        for c in range(k - 1, 0, -1):
            dist[c] = dist[c] * q + dist[c - 1] * p
        dist[0] *= q
    cache[key] = total
    return total


def expected_sc_cost(graph: SocialGraph, allocation: Mapping[int, int]) -> float:
    return math.fsum(node_coupon_cost(graph, v, k) for v, k in sorted(allocation.items()))


def seed_cost_of(graph: SocialGraph, seeds: Iterable[int]) -> float:
    return math.fsum(float(graph.seed_cost[s]) for s in sorted(seeds))


def total_cost(graph: SocialGraph, deployment: Deployment) -> float:
    return seed_cost_of(graph, deployment.seeds) + expected_sc_cost(graph, deployment.allocation)


def is_feasible(graph: SocialGraph, deployment: Deployment, budget: float, slack: float = 1e-9) -> bool:
    return total_cost(graph, deployment) <= budget + slack


def possibly_active(graph: SocialGraph, seeds: Iterable[int], allocation: Mapping[int, int]) -> set[int]:
    """Users with positive activation probability under ``(seeds, allocation)``.

    A friend is reachable when its edge has positive probability and fewer
    than ``k`` higher-ranked friends are certain (p == 1) redeemers.
    """
    reached = set(seeds)
    stack = sorted(reached)
    while stack:
        u = stack.pop()
        k = allocation.get(u, 0)
        if k <= 0:
            continue
        certain = 0
        targets, probs = graph.neighbor_slice(u)
        for t, p in zip(targets.tolist(), probs.tolist()):
            if certain >= k:
                break
            if p > 0.0 and t not in reached:
                reached.add(t)
                stack.append(t)
            if p >= 1.0:
                certain += 1
    return reached


# single cascades ---------------------------------------------------------


@dataclass
class CascadeOutcome:
    activated: set[int]
    redeemed_edges: set[tuple[int, int]]
    realized_benefit: float
    consumed_sc: dict[int, int]
    hops: dict[int, int] = field(default_factory=dict)
    origin: dict[int, int] = field(default_factory=dict)

    @property
    def max_hop(self) -> int:
        return max(self.hops.values(), default=0)

    def max_hop_by_seed(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for v, h in self.hops.items():
            s = self.origin[v]
            out[s] = max(out.get(s, 0), h)
        return out


def simulate_cascade(graph: SocialGraph, deployment: Deployment, master_seed: int = 0,
                     replication: int = 0) -> CascadeOutcome:
    """Trace one replication in full detail (same coins as the batch estimator)."""
    rep_key = _kernels.replication_key(_kernels.seed_key(master_seed), replication)
    alloc = deployment.allocation
    frontier = sorted(deployment.seeds)
    activated = set(frontier)
    hops = {s: 0 for s in frontier}
    origin = {s: s for s in frontier}
    redeemed: set[tuple[int, int]] = set()
    consumed: dict[int, int] = {}
    # accumulate in activation order so the float sum matches the kernel
    total = 0.0
    for s in frontier:
        total += float(graph.benefit[s])
    hop = 0
    while frontier:
        hop += 1
        nxt = []
        for u in frontier:
            left = alloc.get(u, 0)
            lo, hi = int(graph.indptr[u]), int(graph.indptr[u + 1])
            e = lo
            while left > 0 and e < hi:
                v = int(graph.targets[e])
                if v not in activated and _kernels.coin_uniform(rep_key, e) < graph.probs[e]:
                    activated.add(v)
                    redeemed.add((u, v))
                    consumed[u] = consumed.get(u, 0) + 1
                    hops[v] = hop
                    origin[v] = origin[u]
                    total += float(graph.benefit[v])
                    nxt.append(v)
                    left -= 1
                e += 1
        frontier = sorted(nxt)
    return CascadeOutcome(activated, redeemed, total, consumed, hops, origin)


def hop_stats(outcomes: Sequence[CascadeOutcome]) -> float:
    if not outcomes:
        raise ValueError("need at least one outcome")
    return float(np.mean([o.max_hop for o in outcomes]))


# Monte Carlo estimation --------------------------------------------------


@dataclass(frozen=True)
class BenefitEstimate:
    mean: float
    std_error: float
    replications: int


@dataclass(frozen=True)
class EstimatorConfig:
    replications: int = 1000
    master_seed: int = 0

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")


def _arrays(graph: SocialGraph, seeds: Iterable[int], allocation: Mapping[int, int]):
    seed_arr = np.array(sorted(set(seeds)), dtype=np.int64)
    alloc = np.zeros(graph.n_nodes, dtype=np.int64)
    for v, k in allocation.items():
        alloc[v] = k
    return seed_arr, alloc


def run_replications(graph: SocialGraph, deployment: Deployment, config: EstimatorConfig):
    """Per-replication realized benefit and max hop arrays."""
    seeds, alloc = _arrays(graph, deployment.seeds, deployment.allocation)
    return _kernels.run_cascades(graph, seeds, alloc, config.master_seed, config.replications)


def estimate_benefit(graph: SocialGraph, deployment: Deployment, config: EstimatorConfig) -> BenefitEstimate:
    if not deployment.seeds:
        return BenefitEstimate(0.0, 0.0, config.replications)
    values, _ = run_replications(graph, deployment, config)
    r = config.replications
    mean = float(np.sum(values) / r)
    std = float(np.std(values, ddof=1)) if r > 1 else 0.0
    return BenefitEstimate(mean, std / math.sqrt(r), r)


def redemption_rate(graph: SocialGraph, deployment: Deployment, benefit) -> float:
    """Expected benefit over seed cost plus closed-form expected SC cost.

    ``benefit`` may be a :class:`BenefitEstimate` or a plain number.
    """
    mean = benefit.mean if isinstance(benefit, BenefitEstimate) else float(benefit)
    if deployment.is_empty():
        return 0.0
    cost = total_cost(graph, deployment)
    if cost <= 0.0:
        if mean > 0.0:
            raise ZeroDivisionError("deployment has positive benefit but zero cost")
        return 0.0
    return mean / cost


class MonteCarloEstimator:
    """Benefit oracle backed by the cascade kernel.

    Repeated queries reuse the same coins (common random numbers), so
    differences between two deployments are far less noisy than either value.
    """

    def __init__(self, replications: int = 1000, master_seed: int = 0):
        self.config = EstimatorConfig(replications, master_seed)
        self._cache: dict = {}

    def estimate(self, graph: SocialGraph, seeds: Iterable[int], allocation: Mapping[int, int]) -> BenefitEstimate:
        seeds = frozenset(seeds)
        key = (graph, seeds, frozenset((v, k) for v, k in allocation.items() if k > 0))
        hit = self._cache.get(key)
        if hit is None:
            hit = estimate_benefit(graph, Deployment(seeds, allocation), self.config)
            self._cache[key] = hit
        return hit

    def benefit(self, graph: SocialGraph, seeds: Iterable[int], allocation: Mapping[int, int]) -> float:
        return self.estimate(graph, seeds, allocation).mean

    def clear(self) -> None:
        self._cache.clear()

    def __repr__(self):
        return f"MonteCarloEstimator(replications={self.config.replications}, master_seed={self.config.master_seed})"


def deployment_benefit(estimator, graph: SocialGraph, deployment: Deployment) -> float:
    return estimator.benefit(graph, deployment.seeds, deployment.allocation)


def deployment_rate(estimator, graph: SocialGraph, deployment: Deployment) -> float:
    return redemption_rate(graph, deployment, deployment_benefit(estimator, graph, deployment))
