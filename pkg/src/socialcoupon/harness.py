"""Experiment runner: config parsing, algorithm dispatch, metrics and CSV.

A config is plain text, one ``key = value`` per line, ``#`` for comments::

    graph = synthetic:power-law:200:7     # or a path to an edge list
    economics = econ.csv                  # optional, only with a path graph
    budget = 50
    lambda = 1                            # 'none' keeps the raw economics
    kappa = 10
    algorithms = S3CA, IM-U, IM-L(32), PM-U, IM-S
    replications = 1000                   # cascades used to score each result
    search_replications = 200             # cascades per estimate inside the algorithms
    master_seed = 0
    output = results.csv                  # stdout when absent
    timing = true                         # false writes 0 runtimes (byte-stable output)
    coupon_scope = seeds                  # or 'reachable', for the IM/PM baselines
"""

from __future__ import annotations

import csv
import io
import logging
import math
import re
import time
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .baselines import baseline_im_s, baseline_run, parse_variant
from .graph import Deployment, SocialGraph, generate_synthetic, load_edge_list, scale_ratios
from .maneuver import run_s3ca
from .oracle import optimal_deployment
from .propagation import (
    EstimatorConfig,
    MonteCarloEstimator,
    expected_sc_cost,
    run_replications,
    seed_cost_of,
    total_cost,
)

log = logging.getLogger(__name__)

SLACK = 1e-9
_ALGORITHM = re.compile(r"^(S3CA|IM-S|ORACLE|(?:IM|PM)-U|(?:IM|PM)-L(?:\(\d+\))?)$")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    graph_source: str
    budget: float
    algorithms: list
    economics_path: str | None = None
    lambda_value: float | None = 1.0
    kappa_value: float | None = 10.0
    replications: int = 1000
    search_replications: int = 200
    master_seed: int = 0
    output_path: str | None = None
    timing: bool = True
    coupon_scope: str = "seeds"

    def __post_init__(self):
        if not self.budget > 0:
            raise ConfigError("budget must be positive")
        if self.replications < 1 or self.search_replications < 1:
            raise ConfigError("replication counts must be >= 1")
        if not self.algorithms:
            raise ConfigError("at least one algorithm is required")
        for name in self.algorithms:
            if not _ALGORITHM.match(name):
                raise ConfigError(f"unknown algorithm {name!r}")
        if self.coupon_scope not in ("seeds", "reachable"):
            raise ConfigError("coupon_scope must be 'seeds' or 'reachable'")
        for label, value in (("lambda", self.lambda_value), ("kappa", self.kappa_value)):
            if value is not None and not value > 0:
                raise ConfigError(f"{label} must be positive")


@dataclass
class MetricRow:
    algorithm: str
    budget: float
    lambda_: float | None
    kappa: float | None
    redemption_rate: float
    total_benefit: float
    seed_cost: float
    sc_cost: float
    seed_sc_rate: float
    avg_max_hop: float
    runtime_seconds: float
    deployment: Deployment | None = field(default=None, repr=False, compare=False)


CSV_COLUMNS = ["algorithm", "budget", "lambda", "kappa", "redemption_rate", "total_benefit",
               "seed_cost", "sc_cost", "seed_sc_rate", "avg_max_hop", "runtime_seconds"]


# parsing -------------------------------------------------------------------

def _as_text(source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def _real(key, raw, allow_none=False):
    if allow_none and raw.lower() == "none":
        return None
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None


def _int(key, raw):
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def _bool(key, raw):
    low = raw.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{key}: expected true/false, got {raw!r}")


_KEYS = {
    "graph": ("graph_source", str),
    "economics": ("economics_path", str),
    "budget": ("budget", _real),
    "lambda": ("lambda_value", lambda k, r: _real(k, r, True)),
    "kappa": ("kappa_value", lambda k, r: _real(k, r, True)),
    "algorithms": ("algorithms", lambda k, r: [a.strip() for a in r.split(",") if a.strip()]),
    "replications": ("replications", _int),
    "search_replications": ("search_replications", _int),
    "master_seed": ("master_seed", _int),
    "output": ("output_path", str),
    "timing": ("timing", _bool),
    "coupon_scope": ("coupon_scope", str),
}
_REQUIRED = ("graph", "budget", "algorithms")


def parse_config(source, base_dir: str | Path | None = None) -> ExperimentConfig:
    """Parse ``key = value`` text (bytes, str or a stream).

    Unknown keys are rejected.  A repeated key keeps its last value and logs
    a warning.  Relative paths are resolved against ``base_dir`` when given.
    """
    raw: dict[str, tuple[int, str]] = {}
    for lineno, line in enumerate(_as_text(source).splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            log.warning("line %d: duplicate key %r overrides line %d", lineno, key, raw[key][0])
        raw[key] = (lineno, value)
    missing = [k for k in _REQUIRED if k not in raw]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}")

    kwargs = {}
    for key, (_, value) in raw.items():
        name, conv = _KEYS[key]
        kwargs[name] = value if conv is str else conv(key, value)
    if base_dir is not None:
        base = Path(base_dir)
        for name in ("economics_path", "output_path"):
            if kwargs.get(name):
                kwargs[name] = str(base / kwargs[name])
        if not kwargs["graph_source"].startswith("synthetic:"):
            kwargs["graph_source"] = str(base / kwargs["graph_source"])
    return ExperimentConfig(**kwargs)


# running -------------------------------------------------------------------

def load_graph(config: ExperimentConfig) -> SocialGraph:
    """Load or generate the graph and apply the lambda/kappa scaling."""
    src = config.graph_source
    if src.startswith("synthetic:"):
        parts = src.split(":")
        if len(parts) != 4:
            raise ConfigError("synthetic graphs are written synthetic:<kind>:<n>:<seed>")
        if config.economics_path:
            raise ConfigError("economics cannot be combined with a synthetic graph")
        graph = generate_synthetic(parts[1], _int("graph", parts[2]), rng_seed=_int("graph", parts[3]))
    else:
        with open(src, "rb") as fh:
            if config.economics_path:
                with open(config.economics_path, "rb") as econ:
                    graph = load_edge_list(fh, econ)
            else:
                graph = load_edge_list(fh)
    return scale_ratios(graph, config.lambda_value, config.kappa_value)


def _build(name: str, graph: SocialGraph, config: ExperimentConfig, estimator) -> Deployment:
    if name == "S3CA":
        return run_s3ca(graph, config.budget, estimator).deployment
    if name == "IM-S":
        return baseline_im_s(graph, config.budget, estimator)
    if name == "ORACLE":
        return optimal_deployment(graph, config.budget)[0]
    parse_variant(name)
    return baseline_run(graph, config.budget, name, estimator, scope=config.coupon_scope)


def evaluate(graph: SocialGraph, deployment: Deployment, config: EstimatorConfig) -> tuple[float, float]:
    """Mean realized benefit and mean farthest hop over ``config`` replications."""
    if not deployment.seeds:
        return 0.0, 0.0
    benefit, hops = run_replications(graph, deployment, config)
    return float(np.sum(benefit) / len(benefit)), float(np.mean(hops))


def run_experiment(config: ExperimentConfig, graph: SocialGraph | None = None) -> list[MetricRow]:
    """One row per algorithm.  Search and scoring use separate coin streams
    (``master_seed`` and ``master_seed + 1``) so the scores are not biased
    toward what the search happened to see."""
    if graph is None:
        graph = load_graph(config)
    scoring = EstimatorConfig(config.replications, config.master_seed + 1)
    rows = []
    for name in config.algorithms:
        estimator = MonteCarloEstimator(config.search_replications, config.master_seed)
        start = time.perf_counter()
        dep = _build(name, graph, config, estimator)
        elapsed = time.perf_counter() - start if config.timing else 0.0
        if total_cost(graph, dep) > config.budget + SLACK:
            raise RuntimeError(f"{name} returned a deployment over budget")
        benefit, hop = evaluate(graph, dep, scoring)
        seed_c = seed_cost_of(graph, dep.seeds)
        sc_c = expected_sc_cost(graph, dep.allocation)
        cost = seed_c + sc_c
        rate = benefit / cost if cost > 0 else (math.inf if benefit > 0 else 0.0)
        rows.append(MetricRow(name, config.budget, config.lambda_value, config.kappa_value, rate, benefit,
                              seed_c, sc_c, seed_c / sc_c if sc_c > 0 else math.inf, hop, elapsed, dep))
    return rows


# output --------------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, str):
        return value
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.6g}"


def emit_csv(rows: list[MetricRow], sink) -> None:
    """Header plus one line per row; reals with 6 significant digits."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    names = [f.name for f in fields(MetricRow) if f.name != "deployment"]
    for row in rows:
        writer.writerow([_fmt(getattr(row, n)) for n in names])
    text = buf.getvalue()
    if isinstance(sink, io.TextIOBase):
        sink.write(text)
    else:
        sink.write(text.encode("utf-8"))
