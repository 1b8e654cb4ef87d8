"""Second-order biased random walks over a weighted undirected graph."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .. import _rng
from ..errors import ConfigError, DisconnectedGraph
from ..geo_graph import SpatialGraph
from .alias import _build_into, draw

# Upper bound on cached second-order alias entries (float64 + int64 each).
DEFAULT_CACHE_ENTRIES = 1 << 22


@dataclass(frozen=True)
class WalkConfig:
    p: float = 1.0
    q: float = 1.0
    walk_length: int = 80
    walks_per_node: int = 10
    seed: int = 0
    weighted: bool = True

    def __post_init__(self):
        if not (self.p > 0 and self.q > 0):
            raise ConfigError("p and q must be > 0")
        if self.walk_length < 2:
            raise ConfigError("walk_length must be >= 2")
        if self.walks_per_node < 1:
            raise ConfigError("walks_per_node must be >= 1")


@njit(cache=True, nogil=True)
def _is_adjacent(indptr, indices, a, b):
    lo = indptr[a]
    hi = indptr[a + 1]
    while lo < hi:
        mid = (lo + hi) // 2
        x = indices[mid]
        if x == b:
            return True
        if x < b:
            lo = mid + 1
        else:
            hi = mid
    return False


@njit(cache=True, nogil=True)
def _edge_table(indptr, indices, weights, t, v, inv_p, inv_q, prob, alias):
    start = indptr[v]
    deg = indptr[v + 1] - start
    w = np.empty(deg)
    for k in range(deg):
        x = indices[start + k]
        if x == t:
            w[k] = weights[start + k] * inv_p
        elif _is_adjacent(indptr, indices, t, x):
            w[k] = weights[start + k]
        else:
            w[k] = weights[start + k] * inv_q
    _build_into(w, prob, alias)


@njit(cache=True, nogil=True)
def _walks_kernel(indptr, indices, weights, starts, rounds, walk_length, inv_p, inv_q, seed,
                  node_prob, node_alias, edge_slot, cache_prob, cache_alias, cache_ready):
    n_walks = starts.shape[0]
    out = np.empty((n_walks, walk_length), dtype=np.int64)
    maxdeg = 0
    for v in range(indptr.shape[0] - 1):
        maxdeg = max(maxdeg, indptr[v + 1] - indptr[v])
    tmp_prob = np.empty(maxdeg)
    tmp_alias = np.empty(maxdeg, dtype=np.int64)
    for wi in range(n_walks):
        state = _rng.make_state(seed, rounds[wi], starts[wi])
        cur = starts[wi]
        out[wi, 0] = cur
        lo = indptr[cur]
        hi = indptr[cur + 1]
        k = draw(node_prob[lo:hi], node_alias[lo:hi], state)
        prev = cur
        cur = indices[lo + k]
        out[wi, 1] = cur
        for step in range(2, walk_length):
            lo = indptr[cur]
            hi = indptr[cur + 1]
            deg = hi - lo
            # directed edge prev -> cur, located in prev's neighbour list
            e = indptr[prev]
            a = indptr[prev]
            b = indptr[prev + 1]
            while a < b:
                mid = (a + b) // 2
                if indices[mid] < cur:
                    a = mid + 1
                else:
                    b = mid
            e = a
            slot = edge_slot[e]
            if slot >= 0:
                if not cache_ready[e]:
                    _edge_table(indptr, indices, weights, prev, cur, inv_p, inv_q,
                                cache_prob[slot:slot + deg], cache_alias[slot:slot + deg])
                    cache_ready[e] = True
                k = draw(cache_prob[slot:slot + deg], cache_alias[slot:slot + deg], state)
            else:
                _edge_table(indptr, indices, weights, prev, cur, inv_p, inv_q,
                            tmp_prob[:deg], tmp_alias[:deg])
                k = draw(tmp_prob[:deg], tmp_alias[:deg], state)
            prev = cur
            cur = indices[lo + k]
            out[wi, step] = cur
    return out


def _node_tables(indptr, weights):
    prob = np.empty_like(weights)
    alias = np.empty(len(weights), dtype=np.int64)
    for v in range(len(indptr) - 1):
        lo, hi = indptr[v], indptr[v + 1]
        _build_into(weights[lo:hi], prob[lo:hi], alias[lo:hi])
    return prob, alias


def _cache_layout(indptr, indices, max_entries):
    """Assign cache offsets to directed edges in CSR order until the budget is spent."""
    deg = np.diff(indptr)
    need = deg[indices]  # table for edge (t -> v) has deg(v) entries
    csum = np.cumsum(need)
    fits = csum <= max_entries
    slot = np.where(fits, csum - need, -1).astype(np.int64)
    total = int(csum[fits][-1]) if fits.any() else 0
    return slot, max(total, 1)


def generate_walks(g: SpatialGraph, cfg: WalkConfig, cache_entries=DEFAULT_CACHE_ENTRIES) -> np.ndarray:
    """Return a ``(n * walks_per_node, walk_length)`` array of node ids.

    Walks are ordered round by round; within a round start nodes follow a seeded
    permutation. Every walk has its own RNG stream keyed by (seed, round, start).
    """
    if not g.is_connected():
        raise DisconnectedGraph("walks need a connected graph")
    indptr, indices, weights = g.csr()
    if not cfg.weighted:
        weights = np.ones_like(weights)
    node_prob, node_alias = _node_tables(indptr, weights)
    slot, size = _cache_layout(indptr, indices, cache_entries)
    perm_rng = np.random.default_rng([cfg.seed, 0x5EED])
    starts = np.concatenate([perm_rng.permutation(g.n) for _ in range(cfg.walks_per_node)])
    rounds = np.repeat(np.arange(cfg.walks_per_node), g.n)
    return _walks_kernel(
        indptr, indices, weights, starts.astype(np.int64), rounds.astype(np.int64),
        cfg.walk_length, 1.0 / cfg.p, 1.0 / cfg.q, np.uint64(cfg.seed & 0xFFFFFFFFFFFFFFFF),
        node_prob, node_alias, slot, np.empty(size), np.empty(size, dtype=np.int64),
        np.zeros(len(indices), dtype=np.bool_),
    )
