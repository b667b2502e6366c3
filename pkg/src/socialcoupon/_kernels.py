"""Counter-based coins and the compiled cascade kernel.

Every coin is ``uniform(seed, replication, edge) < p(edge)`` where ``uniform``
is a SplitMix64 hash of the three counters.  No generator state is carried,
so a replication's outcome does not depend on which worker runs it or on how
many other coins were drawn before.
"""

import os

import numba as nb
import numpy as np

if "NUMBA_THREADING_LAYER" not in os.environ:
    nb.config.THREADING_LAYER = "workqueue"

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_REP_MULT = 0xD1B54A32D192ED03
_INV_2_53 = 1.0 / 9007199254740992.0


def _mix_py(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def seed_key(master_seed: int) -> int:
    return _mix_py((master_seed + _GOLDEN) & MASK64)


def replication_key(key: int, replication: int) -> int:
    return _mix_py(key ^ ((replication * _REP_MULT) & MASK64))


def coin_uniform(rep_key: int, edge: int) -> float:
    """Pure-Python twin of the compiled coin, for single-cascade tracing."""
    z = _mix_py((rep_key + edge * _GOLDEN) & MASK64)
    return (z >> 11) * _INV_2_53


@nb.njit(cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@nb.njit(cache=True)
def _coin(rep_key, edge):
    z = _mix(rep_key + np.uint64(edge) * np.uint64(_GOLDEN))
    return np.float64(z >> np.uint64(11)) * _INV_2_53


@nb.njit(cache=True)
def coin_uniform_nb(rep_key, edge):
    return _coin(np.uint64(rep_key), edge)


@nb.njit(cache=True)
def _run_range(indptr, targets, probs, benefit, alloc, seeds, key, r0, r1, out_benefit, out_hop):
    n = len(indptr) - 1
    active = np.zeros(n, dtype=np.bool_)
    frontier = np.empty(n, dtype=np.int64)
    nxt = np.empty(n, dtype=np.int64)
    touched = np.empty(n, dtype=np.int64)
    for r in range(r0, r1):
        rk = _mix(key ^ (np.uint64(r) * np.uint64(_REP_MULT)))
        n_touched = 0
        total = 0.0
        n_front = 0
        for s in seeds:
            if not active[s]:
                active[s] = True
                touched[n_touched] = s
                n_touched += 1
                frontier[n_front] = s
                n_front += 1
                total += benefit[s]
        hop = 0
        while n_front > 0:
            frontier[:n_front].sort()
            n_next = 0
            for f in range(n_front):
                u = frontier[f]
                left = alloc[u]
                e = indptr[u]
                end = indptr[u + 1]
                while left > 0 and e < end:
                    v = targets[e]
                    if not active[v] and _coin(rk, e) < probs[e]:
                        active[v] = True
                        touched[n_touched] = v
                        n_touched += 1
                        nxt[n_next] = v
                        n_next += 1
                        total += benefit[v]
                        left -= 1
                    e += 1
            if n_next > 0:
                hop += 1
            frontier, nxt = nxt, frontier
            n_front = n_next
        for i in range(n_touched):
            active[touched[i]] = False
        out_benefit[r - r0] = total
        out_hop[r - r0] = hop


@nb.njit(cache=True, parallel=True)
def _run_parallel(indptr, targets, probs, benefit, alloc, seeds, key, reps, chunk, out_benefit, out_hop):
    n_chunks = (reps + chunk - 1) // chunk
    for c in nb.prange(n_chunks):
        r0 = c * chunk
        r1 = min(reps, r0 + chunk)
        _run_range(indptr, targets, probs, benefit, alloc, seeds, key, r0, r1,
                   out_benefit[r0:r1], out_hop[r0:r1])


_PARALLEL_MIN_WORK = 200_000


def configure_workers() -> int:
    """Apply ``SOCIALCOUPON_WORKERS`` to numba's thread pool; returns the count."""
    raw = os.environ.get("SOCIALCOUPON_WORKERS")
    if raw is None:
        return nb.config.NUMBA_NUM_THREADS
    workers = int(raw)
    if workers < 1:
        raise ValueError("SOCIALCOUPON_WORKERS must be >= 1")
    workers = min(workers, nb.config.NUMBA_NUM_THREADS)
    nb.set_num_threads(workers)
    return workers


def run_cascades(graph, seeds: np.ndarray, alloc: np.ndarray, master_seed: int, reps: int):
    """Realized benefit and maximum hop for replications ``0..reps-1``."""
    key = np.uint64(seed_key(master_seed))
    out_b = np.empty(reps, dtype=np.float64)
    out_h = np.empty(reps, dtype=np.int64)
    args = (graph.indptr, graph.targets, graph.probs, graph.benefit, alloc, seeds, key)
    if nb.get_num_threads() > 1 and reps * max(graph.n_edges, 1) >= _PARALLEL_MIN_WORK:
        _run_parallel(*args, reps, 64, out_b, out_h)
    else:
        _run_range(*args, 0, reps, out_b, out_h)
    return out_b, out_h
