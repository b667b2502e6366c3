"""Social graph model: adjacency, per-user economics, ingestion and generators."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import IO, Iterable, Mapping, Sequence

import numpy as np

# Stand-in for "this user can never be a seed"; excluded from cost ratios.
INFINITE_COST = 1e12


class GraphFormatError(ValueError):
    """Raised for malformed edge-list or economics input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class NodeEconomics:
    benefit: float = 1.0
    seed_cost: float = 1.0
    sc_cost: float = 1.0
    max_constraint: int | None = None


def _frozen(a: np.ndarray, dtype) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SocialGraph:
    """Directed weighted graph in CSR form plus per-node economics.

    Out-edges of every node are stored by descending probability, ties by
    ascending target id, so ``targets[indptr[v]:indptr[v+1]]`` is already the
    order in which ``v`` hands out coupons.
    """

    indptr: np.ndarray
    targets: np.ndarray
    probs: np.ndarray
    benefit: np.ndarray
    seed_cost: np.ndarray
    sc_cost: np.ndarray
    max_constraint: np.ndarray
    raw_ids: tuple = ()
    _cost_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "indptr", _frozen(self.indptr, np.int64))
        set_(self, "targets", _frozen(self.targets, np.int64))
        set_(self, "probs", _frozen(self.probs, np.float64))
        for name in ("benefit", "seed_cost", "sc_cost"):
            set_(self, name, _frozen(getattr(self, name), np.float64))
        set_(self, "max_constraint", _frozen(self.max_constraint, np.int64))
        if not self.raw_ids:
            set_(self, "raw_ids", tuple(range(self.n_nodes)))
        self._validate()

    def _validate(self):
        n = self.n_nodes
        for name in ("benefit", "seed_cost", "sc_cost", "max_constraint"):
            arr = getattr(self, name)
            if arr.shape != (n,):
                raise ValueError(f"{name} must have length {n}")
            if not np.all(np.isfinite(arr)) or np.any(arr < 0):
                raise ValueError(f"{name} must be finite and non-negative")
        if np.any(self.probs < 0) or np.any(self.probs > 1) or np.any(np.isnan(self.probs)):
            raise ValueError("edge probabilities must lie in [0, 1]")
        if np.any(self.max_constraint > self.out_degrees):
            raise ValueError("max_constraint cannot exceed out-degree")
        if len(self.raw_ids) != n:
            raise ValueError("raw_ids must have one entry per node")

    # construction -------------------------------------------------------

    @classmethod
    def build(
        cls,
        n: int,
        edges: Iterable[tuple[int, int, float]],
        benefit: Sequence[float] | float = 1.0,
        seed_cost: Sequence[float] | float = 1.0,
        sc_cost: Sequence[float] | float = 1.0,
        max_constraint: Sequence[int] | None = None,
        raw_ids: Sequence | None = None,
    ) -> "SocialGraph":
        """Build from ``(src, dst, prob)`` triples over dense ids ``0..n-1``.

        Duplicate pairs keep their first probability; self-loops are rejected.
        """
        seen: dict[tuple[int, int], float] = {}
        for src, dst, p in edges:
            src, dst = int(src), int(dst)
            if not (0 <= src < n and 0 <= dst < n):
                raise ValueError(f"edge ({src}, {dst}) out of range for {n} nodes")
            if src == dst:
                raise ValueError(f"self-loop on node {src}")
            seen.setdefault((src, dst), float(p))
        src = np.fromiter((e[0] for e in seen), dtype=np.int64, count=len(seen))
        dst = np.fromiter((e[1] for e in seen), dtype=np.int64, count=len(seen))
        prob = np.fromiter(seen.values(), dtype=np.float64, count=len(seen))
        indptr, dst, prob = _to_csr(n, src, dst, prob)
        out_deg = np.diff(indptr)
        mc = out_deg.copy() if max_constraint is None else np.asarray(max_constraint, dtype=np.int64)
        return cls(
            indptr=indptr,
            targets=dst,
            probs=prob,
            benefit=np.broadcast_to(np.asarray(benefit, dtype=np.float64), (n,)),
            seed_cost=np.broadcast_to(np.asarray(seed_cost, dtype=np.float64), (n,)),
            sc_cost=np.broadcast_to(np.asarray(sc_cost, dtype=np.float64), (n,)),
            max_constraint=mc,
            raw_ids=tuple(raw_ids) if raw_ids is not None else (),
        )

    def with_probs(self, probs: np.ndarray) -> "SocialGraph":
        """Same topology with new per-edge probabilities (given in CSR edge order)."""
        src = np.repeat(np.arange(self.n_nodes), self.out_degrees)
        indptr, dst, prob = _to_csr(self.n_nodes, src, self.targets, np.asarray(probs, dtype=np.float64))
        return replace(self, indptr=indptr, targets=dst, probs=prob, _cost_cache={})

    def with_economics(self, **arrays) -> "SocialGraph":
        return replace(self, _cost_cache={}, **arrays)

    # queries ----------------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return len(self.indptr) - 1

    @property
    def n_edges(self) -> int:
        return len(self.targets)

    @property
    def out_degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def in_degrees(self) -> np.ndarray:
        return np.bincount(self.targets, minlength=self.n_nodes)

    def out_degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def neighbor_slice(self, v: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.indptr[v], self.indptr[v + 1]
        return self.targets[lo:hi], self.probs[lo:hi]

    def sorted_out_neighbors(self, v: int) -> list[tuple[int, float]]:
        if not 0 <= v < self.n_nodes:
            raise KeyError(f"unknown node {v}")
        t, p = self.neighbor_slice(v)
        return list(zip(t.tolist(), p.tolist()))

    def edges(self) -> Iterable[tuple[int, int, float]]:
        for v in range(self.n_nodes):
            for t, p in self.sorted_out_neighbors(v):
                yield v, t, p

    def economics(self, v: int) -> NodeEconomics:
        return NodeEconomics(
            float(self.benefit[v]),
            float(self.seed_cost[v]),
            float(self.sc_cost[v]),
            int(self.max_constraint[v]),
        )

    def dense_id(self, raw) -> int:
        try:
            index = self.__dict__["_raw_index"]
        except KeyError:
            index = {r: i for i, r in enumerate(self.raw_ids)}
            object.__setattr__(self, "_raw_index", index)
        return index[raw]


def _to_csr(n, src, dst, prob):
    # primary key src, then descending prob, then ascending dst
    order = np.lexsort((dst, -prob, src))
    src, dst, prob = src[order], dst[order], prob[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return indptr, dst, prob


class Deployment:
    """Seed set plus coupon allocation.

    ``allocation`` maps node -> coupon count; zero entries are dropped, so the
    internal-node set is exactly the allocation's key set.
    """

    __slots__ = ("seeds", "allocation")

    def __init__(self, seeds: Iterable[int] = (), allocation: Mapping[int, int] | None = None):
        alloc = {}
        for v, k in sorted((allocation or {}).items()):
            k = int(k)
            if k < 0:
                raise ValueError(f"negative allocation for node {v}")
            if k:
                alloc[int(v)] = k
        object.__setattr__(self, "seeds", frozenset(int(s) for s in seeds))
        object.__setattr__(self, "allocation", MappingProxyType(alloc))

    def __setattr__(self, name, value):
        raise AttributeError("Deployment is immutable")

    @property
    def internals(self) -> frozenset:
        return frozenset(self.allocation)

    def __eq__(self, other):
        if not isinstance(other, Deployment):
            return NotImplemented
        return self.seeds == other.seeds and dict(self.allocation) == dict(other.allocation)

    def __hash__(self):
        return hash((self.seeds, frozenset(self.allocation.items())))

    def __repr__(self):
        return f"Deployment(seeds={sorted(self.seeds)}, allocation={dict(self.allocation)})"

    def is_empty(self) -> bool:
        return not self.seeds and not self.allocation

    def with_allocation(self, allocation: Mapping[int, int]) -> "Deployment":
        return Deployment(self.seeds, allocation)

    def validate(self, graph: SocialGraph) -> None:
        n = graph.n_nodes
        for s in self.seeds:
            if not 0 <= s < n:
                raise ValueError(f"seed {s} not in graph")
        for v, k in self.allocation.items():
            if not 0 <= v < n:
                raise ValueError(f"allocated node {v} not in graph")
            if k > graph.max_constraint[v]:
                raise ValueError(f"node {v}: allocation {k} exceeds max_constraint {graph.max_constraint[v]}")


# ingestion ------------------------------------------------------------


def _text_lines(source: IO | bytes | str):
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    elif isinstance(source, str):
        source = io.StringIO(source)
    for raw in source:
        yield raw.decode("utf-8") if isinstance(raw, (bytes, bytearray)) else raw


def _parse_id(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise GraphFormatError(f"node id {token!r} is not an integer", lineno) from None


def load_edge_list(source, node_economics=None) -> SocialGraph:
    """Read a SNAP-style edge list (``src dst [prob]`` per line, ``#`` comments).

    Raw ids are remapped to dense indices in ascending raw-id order.  Missing
    probabilities default to the reciprocal of the target's in-degree; repeated
    pairs and self-loops are skipped.  Users listed only in the economics file
    are kept as isolated users.
    """
    econ_lines = None
    extra: set[int] = set()
    if node_economics is not None:
        econ_lines = list(_text_lines(node_economics))
        extra = _economics_ids(econ_lines)
    pairs: dict[tuple[int, int], float | None] = {}
    nodes: set[int] = set()
    for lineno, line in enumerate(_text_lines(source), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise GraphFormatError(f"expected 'src dst [prob]', got {line!r}", lineno)
        a, b = _parse_id(parts[0], lineno), _parse_id(parts[1], lineno)
        prob = None
        if len(parts) == 3:
            try:
                prob = float(parts[2])
            except ValueError:
                raise GraphFormatError(f"bad probability {parts[2]!r}", lineno) from None
            if not 0.0 <= prob <= 1.0:
                raise GraphFormatError(f"probability {prob} outside [0, 1]", lineno)
        nodes.update((a, b))
        if a != b:
            pairs.setdefault((a, b), prob)

    raw_ids = sorted(nodes | extra)
    index = {r: i for i, r in enumerate(raw_ids)}
    n = len(raw_ids)
    indeg = np.zeros(n, dtype=np.int64)
    for _, b in pairs:
        indeg[index[b]] += 1
    edges = [
        (index[a], index[b], p if p is not None else 1.0 / indeg[index[b]])
        for (a, b), p in pairs.items()
    ]
    graph = SocialGraph.build(n, edges, raw_ids=raw_ids)
    if econ_lines is not None:
        graph = _apply_economics(graph, "".join(econ_lines), index)
    return graph


def _economics_ids(lines) -> set[int]:
    ids = set()
    rows = [r for r in csv.reader(lines) if r and not r[0].startswith("#")]
    for row in rows[1:]:
        try:
            ids.add(int(row[0].strip()))
        except ValueError:
            pass  # reported with its line number by _apply_economics
    return ids


def _apply_economics(graph: SocialGraph, source, index: Mapping[int, int]) -> SocialGraph:
    benefit = graph.benefit.copy()
    seed_cost = graph.seed_cost.copy()
    sc_cost = graph.sc_cost.copy()
    max_c = graph.max_constraint.copy()
    reader = csv.reader(_text_lines(source))
    header = None
    for lineno, row in enumerate(reader, start=1):
        if not row or row[0].startswith("#"):
            continue
        if header is None:
            header = [h.strip() for h in row]
            if header[:4] != ["node", "benefit", "seed_cost", "sc_cost"] or header[4:] not in ([], ["max_constraint"]):
                raise GraphFormatError(f"unexpected economics header {row!r}", lineno)
            continue
        if len(row) != len(header):
            raise GraphFormatError(f"expected {len(header)} columns, got {len(row)}", lineno)
        raw = _parse_id(row[0].strip(), lineno)
        if raw not in index:
            raise GraphFormatError(f"economics row for unknown node {raw}", lineno)
        v = index[raw]
        try:
            values = [float(x) for x in row[1:4]]
        except ValueError:
            raise GraphFormatError(f"non-numeric economics value in {row!r}", lineno) from None
        if any(not math.isfinite(x) or x < 0 for x in values):
            raise GraphFormatError(f"economics values must be finite and non-negative: {row!r}", lineno)
        benefit[v], seed_cost[v], sc_cost[v] = values
        if len(row) == 5 and row[4].strip():
            try:
                mc = int(row[4])
            except ValueError:
                raise GraphFormatError(f"bad max_constraint {row[4]!r}", lineno) from None
            if mc < 0 or mc > graph.out_degree(v):
                raise GraphFormatError(f"max_constraint {mc} outside [0, out-degree]", lineno)
            max_c[v] = mc
    return graph.with_economics(benefit=benefit, seed_cost=seed_cost, sc_cost=sc_cost, max_constraint=max_c)


def write_edge_list(graph: SocialGraph, sink: IO[str], with_probs: bool = False) -> None:
    sink.write(f"# nodes: {graph.n_nodes} edges: {graph.n_edges}\n")
    for v, t, p in graph.edges():
        a, b = graph.raw_ids[v], graph.raw_ids[t]
        sink.write(f"{a}\t{b}\t{p!r}\n" if with_probs else f"{a}\t{b}\n")


def write_economics(graph: SocialGraph, sink: IO[str]) -> None:
    w = csv.writer(sink, lineterminator="\n")
    w.writerow(["node", "benefit", "seed_cost", "sc_cost", "max_constraint"])
    for v in range(graph.n_nodes):
        w.writerow([graph.raw_ids[v], repr(float(graph.benefit[v])), repr(float(graph.seed_cost[v])),
                    repr(float(graph.sc_cost[v])), int(graph.max_constraint[v])])


# probability assignment and scaling -------------------------------------


def assign_indegree_probabilities(graph: SocialGraph) -> SocialGraph:
    """Weighted-cascade setting: every in-edge of ``j`` gets ``1 / indeg(j)``."""
    indeg = graph.in_degrees
    return graph.with_probs(1.0 / indeg[graph.targets] if graph.n_edges else np.zeros(0))


def scale_ratios(graph: SocialGraph, lambda_target: float | None = None,
                 kappa_target: float | None = None) -> SocialGraph:
    """Rescale benefits so sum(b)/sum(c_sc) == lambda, then seed costs so
    sum(c_seed)/sum(b) == kappa.  Each rescale is one common factor."""
    benefit, seed_cost = graph.benefit, graph.seed_cost
    if lambda_target is not None:
        if lambda_target <= 0:
            raise ValueError("lambda must be positive")
        total_sc, total_b = graph.sc_cost.sum(), benefit.sum()
        if total_sc <= 0 or total_b <= 0:
            raise ValueError("cannot scale to lambda: total SC cost or total benefit is zero")
        benefit = benefit * (lambda_target * total_sc / total_b)
    if kappa_target is not None:
        if kappa_target <= 0:
            raise ValueError("kappa must be positive")
        total_b, total_seed = benefit.sum(), seed_cost.sum()
        if total_b <= 0 or total_seed <= 0:
            raise ValueError("cannot scale to kappa: total benefit or total seed cost is zero")
        seed_cost = seed_cost * (kappa_target * total_b / total_seed)
    return graph.with_economics(benefit=benefit, seed_cost=seed_cost)


# synthetic generators ---------------------------------------------------


def generate_synthetic(kind: str, n: int, params: Mapping | None = None, rng_seed: int = 0) -> SocialGraph:
    """Random directed graph with economics drawn like the evaluation setup.

    kinds: ``uniform-random`` (each ordered pair present with probability
    ``avg_degree/(n-1)``) and ``power-law`` (out-degrees ~ d**-exponent on
    ``1..n-1``, targets uniform).  Benefit ~ N(mu, sigma) clamped at 0, seed
    cost = ``seed_cost_unit * max(out_degree, 1)``, SC cost uniform.
    Edge probabilities are reciprocal in-degrees.
    """
    params = dict(params or {})
    if n < 1:
        raise ValueError("n must be >= 1")
    mu = float(params.pop("mu", 10.0))
    sigma = float(params.pop("sigma", 2.0))
    unit = float(params.pop("seed_cost_unit", 1.0))
    sc = float(params.pop("sc_cost", 1.0))
    if sigma < 0 or unit < 0 or sc < 0:
        raise ValueError("sigma, seed_cost_unit and sc_cost must be non-negative")
    rng = np.random.default_rng(rng_seed)

    if kind == "uniform-random":
        avg = float(params.pop("avg_degree", 4.0))
        if avg < 0:
            raise ValueError("avg_degree must be non-negative")
        p = min(1.0, avg / (n - 1)) if n > 1 else 0.0
        mask = rng.random((n, n)) < p
        np.fill_diagonal(mask, False)
        src, dst = np.nonzero(mask)
    elif kind == "power-law":
        exponent = float(params.pop("exponent", 2.5))
        if exponent <= 1:
            raise ValueError("exponent must exceed 1")
        if n == 1:
            src = dst = np.zeros(0, dtype=np.int64)
        else:
            support = np.arange(1, n)
            weights = support ** -exponent
            degrees = rng.choice(support, size=n, p=weights / weights.sum())
            src_l, dst_l = [], []
            for v, d in enumerate(degrees):
                others = rng.choice(n - 1, size=int(d), replace=False)
                others = others + (others >= v)
                src_l.append(np.full(int(d), v))
                dst_l.append(others)
            src, dst = np.concatenate(src_l), np.concatenate(dst_l)
    else:
        raise ValueError(f"unknown generator kind {kind!r}")
    if params:
        raise ValueError(f"unknown generator parameters: {sorted(params)}")

    benefit = np.maximum(rng.normal(mu, sigma, size=n), 0.0)
    topo = SocialGraph.build(n, zip(src.tolist(), dst.tolist(), [1.0] * len(src)))
    topo = assign_indegree_probabilities(topo)
    return topo.with_economics(
        benefit=benefit,
        seed_cost=unit * np.maximum(topo.out_degrees, 1).astype(np.float64),
        sc_cost=np.full(n, sc),
    )
