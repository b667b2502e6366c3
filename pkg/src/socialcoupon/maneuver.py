"""Coupon maneuvering and the full three-phase pipeline.

After investment, some coupons sit where they buy little.  A guaranteed path
to an unreached user can be worth more per unit of cost, so coupons are
pulled back from the users where they hurt least (smallest deterioration
index) and placed along the path, as long as each move pays for itself
and improves the overall redemption rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .graph import Deployment, SocialGraph
from .investment import deploy_investment, rate_of
from .paths import GuaranteedPath, identify_guaranteed_paths
from .propagation import expected_sc_cost, node_coupon_cost, possibly_active, seed_cost_of

SLACK = 1e-9


@dataclass(frozen=True)
class ManeuverOperation:
    di: float
    source: int
    retrieved: int
    mapping: dict
    last_target: int


@dataclass
class ManeuverSet:
    targets: tuple = ()  # path users that should receive coupons, top-down
    ops: list = field(default_factory=list)

    @property
    def total_moved(self) -> int:
        return sum(op.retrieved for op in self.ops)

    @property
    def last_target(self):
        if self.ops:
            return self.ops[-1].last_target
        return self.targets[0] if self.targets else None


def _nearest_active_ascendant(graph: SocialGraph, deployment: Deployment, path: GuaranteedPath,
                              include_terminal: bool = False) -> int:
    active = possibly_active(graph, deployment.seeds, deployment.allocation)
    chain = path.chain if include_terminal else path.chain[:-1]
    for node in reversed(chain):
        if node in active:
            return node
    return path.seed


def amelioration_index(path: GuaranteedPath, deployment: Deployment, graph: SocialGraph,
                       estimator=None) -> float | None:
    """Benefit gained per unit of extra guaranteed cost, measured from the
    deepest ascendant that the deployment can already reach.

    Returns ``None`` when the path adds no cost over that ascendant, which
    covers the trivial path at a seed and any path whose terminal the
    deployment already reaches.  The estimator is unused because
    both paths carry their own benefit; it is accepted for a uniform call shape.
    """
    if path.terminal_parent is None:
        return None
    anchor = path.prefix(_nearest_active_ascendant(graph, deployment, path, include_terminal=True))
    gain = path.expected_benefit - anchor.expected_benefit
    cost = path.guaranteed_cost - anchor.guaranteed_cost
    if cost <= SLACK:
        return None
    return gain / cost


def _drop(alloc: dict, v: int, k: int) -> dict:
    out = dict(alloc)
    left = out.get(v, 0) - k
    if left > 0:
        out[v] = left
    else:
        out.pop(v, None)
    return out


def deterioration_index(graph: SocialGraph, deployment: Deployment, source: int, k: int,
                        estimator) -> float:
    """Benefit lost per unit of SC cost saved when ``source`` gives up ``k`` coupons."""
    held = deployment.allocation.get(source, 0)
    if not 1 <= k <= held:
        raise ValueError(f"cannot retrieve {k} coupons from {source} holding {held}")
    alloc = dict(deployment.allocation)
    reduced = _drop(alloc, source, k)
    loss = estimator.benefit(graph, deployment.seeds, alloc) - estimator.benefit(graph, deployment.seeds, reduced)
    saved = node_coupon_cost(graph, source, held) - node_coupon_cost(graph, source, held - k)
    if saved <= 0:
        raise ZeroDivisionError(f"retrieving from {source} saves no cost")
    return float(loss / saved)


def maneuver_targets(graph: SocialGraph, deployment: Deployment, path: GuaranteedPath) -> tuple:
    """Path users from the nearest reachable ascendant down to the terminal's parent."""
    anchor = _nearest_active_ascendant(graph, deployment, path)
    chain = path.chain[:-1]
    return chain[chain.index(anchor):]


def coupon_deficit(path: GuaranteedPath, deployment: Deployment, targets) -> int:
    need = path.guaranteed_allocation
    return sum(max(0, need.get(t, 0) - deployment.allocation.get(t, 0)) for t in targets)


def _placements(op: ManeuverOperation, alloc: dict) -> dict:
    out = dict(alloc)
    for t, c in op.mapping.items():
        out[t] = out.get(t, 0) + c
    return out


def apply_operation(deployment: Deployment, op: ManeuverOperation) -> Deployment:
    return deployment.with_allocation(_placements(op, _drop(dict(deployment.allocation), op.source, op.retrieved)))


def derive_maneuvers(graph: SocialGraph, deployment: Deployment, path: GuaranteedPath,
                     current: ManeuverSet, estimator, budget: float = math.inf) -> list[ManeuverOperation]:
    """Candidate moves for the next step, sorted by (DI, retrieved, source).

    ``deployment`` is the working state with the moves in ``current``
    already applied.  Each candidate retrieves ``k`` spare coupons from one
    source and fills the targets top-down from where the previous move
    stopped.  Candidates that cannot place every coupon, or that break the
    budget part-way, are left out.
    """
    need = path.guaranteed_allocation
    alloc = dict(deployment.allocation)
    seed_total = seed_cost_of(graph, deployment.seeds)
    targets = list(current.targets)
    start = targets.index(current.last_target) if targets else 0
    ops = []
    for src in sorted(alloc):
        spare = alloc[src] - need.get(src, 0)
        for k in range(1, spare + 1):
            try:
                di = deterioration_index(graph, deployment, src, k, estimator)
            except ZeroDivisionError:
                continue
            trial = _drop(alloc, src, k)
            remaining, idx, mapping, ok = k, start, {}, True
            while remaining > 0 and idx < len(targets):
                t = targets[idx]
                room = min(need.get(t, 0), int(graph.max_constraint[t])) - trial.get(t, 0)
                if room <= 0:
                    idx += 1
                    continue
                put = min(remaining, room)
                trial[t] = trial.get(t, 0) + put
                mapping[t] = mapping.get(t, 0) + put
                remaining -= put
                if seed_total + expected_sc_cost(graph, trial) > budget + SLACK:
                    ok = False
                    break
                if remaining > 0:
                    idx += 1
            if not ok or remaining > 0:
                continue
            ops.append(ManeuverOperation(di, src, k, mapping, targets[min(idx, len(targets) - 1)]))
    ops.sort(key=lambda op: (op.di, op.retrieved, op.source))
    return ops


def maneuver_gap(path: GuaranteedPath, candidate: ManeuverOperation, current: ManeuverSet,
                 graph: SocialGraph, estimator, deployment: Deployment) -> float | None:
    """Benefit per unit of cost of the coupons ``candidate`` places.

    Both sides are measured on the working ``deployment`` (``current``
    already applied), so the value is the marginal worth of the new
    placements.  ``None`` means the placements cost nothing extra and the
    candidate is rejected.
    """
    base = dict(deployment.allocation)
    placed = _placements(candidate, base)
    cost_gap = expected_sc_cost(graph, placed) - expected_sc_cost(graph, base)
    if cost_gap <= SLACK:
        return None
    gain = estimator.benefit(graph, deployment.seeds, placed) - estimator.benefit(graph, deployment.seeds, base)
    return gain / cost_gap


def _create_path(graph, deployment, path, budget, estimator):
    """Try to build ``path`` by moving coupons; returns the new state or None."""
    targets = maneuver_targets(graph, deployment, path)
    delta = coupon_deficit(path, deployment, targets)
    if delta == 0:
        return None
    moves = ManeuverSet(tuple(targets))
    working = deployment
    working_rate = rate_of(graph, estimator, working)
    while moves.total_moved < delta:
        accepted = None
        for op in derive_maneuvers(graph, working, path, moves, estimator, budget):
            if moves.total_moved + op.retrieved > delta:
                continue
            beta = maneuver_gap(path, op, moves, graph, estimator, working)
            if beta is None or not op.di < beta:
                continue
            trial = apply_operation(working, op)
            trial_rate = rate_of(graph, estimator, trial)
            if trial_rate > working_rate:
                accepted = (op, trial, trial_rate)
                break
        if accepted is None:
            return None
        op, working, working_rate = accepted
        moves.ops.append(op)
    return working, moves


def maneuver(graph: SocialGraph, deployment: Deployment, paths: list[GuaranteedPath],
             budget: float, estimator) -> tuple[Deployment, list[ManeuverSet]]:
    """Single pass over the paths by descending AI; returns the final state
    and the committed maneuver sets."""
    ranked = []
    for gp in paths:
        ai = amelioration_index(gp, deployment, graph, estimator)
        if ai is not None:
            ranked.append((ai, gp))
    ranked.sort(key=lambda pair: (-pair[0], pair[1].seed, pair[1].terminal))

    current = deployment
    committed = []
    for _, gp in ranked:
        if gp.guaranteed_cost > expected_sc_cost(graph, current.allocation) + SLACK:
            continue
        if current.allocation.get(gp.terminal_parent, 0) != 0:
            continue
        outcome = _create_path(graph, current, gp, budget, estimator)
        if outcome is None:
            continue
        current, moves = outcome
        committed.append(moves)
    return current, committed


def apply_sc_maneuver(graph: SocialGraph, deployment: Deployment, paths: list[GuaranteedPath],
                      budget: float, estimator) -> Deployment:
    return maneuver(graph, deployment, paths, budget, estimator)[0]


@dataclass
class S3caResult:
    deployment: Deployment
    investment: Deployment
    snapshots: list
    paths: list
    maneuvers: list

    def rate(self, graph: SocialGraph, estimator) -> float:
        return rate_of(graph, estimator, self.deployment)


def run_s3ca(graph: SocialGraph, budget: float, estimator) -> S3caResult:
    """Investment, then guaranteed paths, then coupon maneuvering."""
    if budget <= 0:
        raise ValueError("budget must be positive")
    best, snapshots = deploy_investment(graph, budget, estimator)
    if best.is_empty():
        return S3caResult(best, best, snapshots, [], [])
    paths = identify_guaranteed_paths(graph, best, budget, estimator)
    final, moves = maneuver(graph, best, paths, budget, estimator)
    return S3caResult(final, best, snapshots, paths, moves)
