"""SkipGram with negative sampling over node sequences."""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit, prange

from .. import _rng
from .alias import alias_build, draw
from ..errors import ConfigError, DataError, EmptyWalks, MalformedHeader, NodeIdOutOfRange

# Walks are trained in fixed-size chunks; each chunk owns one RNG stream per epoch.
CHUNK_WALKS = 64


@dataclass(frozen=True)
class TrainConfig:
    dims: int = 32
    window: int = 10
    negatives: int = 5
    epochs: int = 5
    lr_initial: float = 0.025
    lr_final: float = 0.0001
    seed: int = 0

    def __post_init__(self):
        if self.dims < 2:
            raise ConfigError("dims must be >= 2")
        if self.window < 1:
            raise ConfigError("window must be >= 1")
        if self.negatives < 1:
            raise ConfigError("negatives must be >= 1")
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if not 0 < self.lr_final <= self.lr_initial:
            raise ConfigError("need 0 < lr_final <= lr_initial")


@dataclass
class Embedding:
    matrix: np.ndarray
    context_matrix: np.ndarray
    loss_history: list = field(default_factory=list)

    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def dims(self):
        return self.matrix.shape[1]

    def checksum(self) -> str:
        return hashlib.sha256(np.ascontiguousarray(self.matrix, dtype="<f8").tobytes()).hexdigest()


@njit(cache=True, nogil=True)
def _sigmoid(x):
    if x >= 0:
        return 1.0 / (1.0 + np.exp(-x))
    z = np.exp(x)
    return z / (1.0 + z)


@njit(cache=True, nogil=True)
def _log_sigmoid(x):
    if x >= 0:
        return -np.log1p(np.exp(-x))
    return x - np.log1p(np.exp(x))


@njit(cache=True, nogil=True)
def pair_loss_grad(v, u_pos, u_neg):
    """Negative log-likelihood of one (center, context) pair and its gradients.

    ``v`` is the center input vector, ``u_pos`` the context output vector and
    ``u_neg`` a ``(k, D)`` block of noise output vectors.
    """
    score = 0.0
    for d in range(v.shape[0]):
        score += u_pos[d] * v[d]
    loss = -_log_sigmoid(score)
    g = _sigmoid(score) - 1.0
    grad_v = g * u_pos
    grad_pos = g * v
    grad_neg = np.empty_like(u_neg)
    for k in range(u_neg.shape[0]):
        s = 0.0
        for d in range(v.shape[0]):
            s += u_neg[k, d] * v[d]
        loss -= _log_sigmoid(-s)
        gk = _sigmoid(s)
        for d in range(v.shape[0]):
            grad_v[d] += gk * u_neg[k, d]
            grad_neg[k, d] = gk * v[d]
    return loss, grad_v, grad_pos, grad_neg


@njit(cache=True, nogil=True)
def sgd_pair(syn0, syn1, center, ctx, neg_ids, lr, scores, grad_v):
    """One simultaneous gradient step on a (center, context, negatives) triple.

    All scores are taken before any row is touched, so the step equals
    ``x -= lr * grad`` with the gradients of ``pair_loss_grad``. Returns the loss.
    """
    dims = syn0.shape[1]
    negatives = neg_ids.shape[0]
    s = 0.0
    for d in range(dims):
        s += syn1[ctx, d] * syn0[center, d]
    scores[0] = s
    loss = -_log_sigmoid(s)
    for k in range(negatives):
        s = 0.0
        nk = neg_ids[k]
        for d in range(dims):
            s += syn1[nk, d] * syn0[center, d]
        scores[k + 1] = s
        loss -= _log_sigmoid(-s)
    g = _sigmoid(scores[0]) - 1.0
    for d in range(dims):
        grad_v[d] = g * syn1[ctx, d]
    for k in range(negatives):
        gk = _sigmoid(scores[k + 1])
        nk = neg_ids[k]
        for d in range(dims):
            grad_v[d] += gk * syn1[nk, d]
    # output rows; a node drawn twice receives both contributions
    for d in range(dims):
        syn1[ctx, d] -= lr * g * syn0[center, d]
    for k in range(negatives):
        gk = _sigmoid(scores[k + 1])
        nk = neg_ids[k]
        for d in range(dims):
            syn1[nk, d] -= lr * gk * syn0[center, d]
    for d in range(dims):
        syn0[center, d] -= lr * grad_v[d]
    return loss


@njit(cache=True, nogil=True)
def _train_chunk(walks, w0, w1, window, negatives, syn0, syn1, noise_prob, noise_alias,
                 noise_ids, state, lr0, lr1, done0, total):
    """SGD over walks[w0:w1]; returns (loss sum, pair count)."""
    dims = syn0.shape[1]
    length = walks.shape[1]
    neg_ids = np.empty(negatives, dtype=np.int64)
    scores = np.empty(negatives + 1)
    grad_v = np.empty(dims)
    loss_sum = 0.0
    pairs = 0
    done = done0
    for wi in range(w0, w1):
        for pos in range(length):
            frac = done / total if total > 0 else 0.0
            lr = lr0 - (lr0 - lr1) * frac
            done += 1
            center = walks[wi, pos]
            lo = max(0, pos - window)
            hi = min(length, pos + window + 1)
            for cpos in range(lo, hi):
                if cpos == pos:
                    continue
                for k in range(negatives):
                    neg_ids[k] = noise_ids[draw(noise_prob, noise_alias, state)]
                loss_sum += sgd_pair(syn0, syn1, center, walks[wi, cpos], neg_ids, lr, scores, grad_v)
                pairs += 1
    return loss_sum, pairs


@njit(cache=True, nogil=True)
def _epoch_serial(walks, window, negatives, syn0, syn1, noise_prob, noise_alias, noise_ids,
                  seed, epoch, lr0, lr1, done0, total, chunk):
    n_walks = walks.shape[0]
    length = walks.shape[1]
    loss_sum = 0.0
    pairs = 0
    c = 0
    for w0 in range(0, n_walks, chunk):
        w1 = min(n_walks, w0 + chunk)
        state = _rng.make_state(seed, epoch, c)
        ls, np_ = _train_chunk(walks, w0, w1, window, negatives, syn0, syn1, noise_prob,
                               noise_alias, noise_ids, state, lr0, lr1, done0 + w0 * length, total)
        loss_sum += ls
        pairs += np_
        c += 1
    return loss_sum, pairs


@njit(cache=True, parallel=True)
def _epoch_parallel(walks, window, negatives, syn0, syn1, noise_prob, noise_alias, noise_ids,
                    seed, epoch, lr0, lr1, done0, total, chunk):
    # lock-free: chunks race on shared rows of syn0/syn1
    n_walks = walks.shape[0]
    length = walks.shape[1]
    n_chunks = (n_walks + chunk - 1) // chunk
    losses = np.zeros(n_chunks)
    counts = np.zeros(n_chunks, dtype=np.int64)
    for c in prange(n_chunks):
        w0 = c * chunk
        w1 = min(n_walks, w0 + chunk)
        state = _rng.make_state(seed, epoch, c)
        ls, np_ = _train_chunk(walks, w0, w1, window, negatives, syn0, syn1, noise_prob,
                               noise_alias, noise_ids, state, lr0, lr1, done0 + w0 * length, total)
        losses[c] = ls
        counts[c] = np_
    return losses.sum(), counts.sum()


def initial_vectors(n, cfg: TrainConfig):
    rng = np.random.default_rng([cfg.seed, 0xE3B])
    half = 0.5 / cfg.dims
    syn0 = rng.uniform(-half, half, size=(n, cfg.dims))
    return syn0, np.zeros((n, cfg.dims))


def noise_table(walks, n):
    """Alias table over the nodes seen in ``walks``, mass proportional to count ** 0.75.

    Returns ``(table, node_ids)``; a draw ``k`` maps to node ``node_ids[k]``.
    """
    counts = np.bincount(np.asarray(walks).ravel(), minlength=n).astype(np.float64)
    seen = np.flatnonzero(counts > 0)
    return alias_build(counts[seen] ** 0.75), seen.astype(np.int64)


def train_skipgram(walks, n, cfg: TrainConfig, threads=1) -> Embedding:
    """Fit input (center) and output (context) vectors for ``n`` nodes.

    Learning rate decays linearly per center token over all epochs. With
    ``threads == 1`` the result is a pure function of ``(walks, n, cfg)``.
    """
    walks = np.asarray(walks, dtype=np.int64)
    if walks.size == 0:
        raise EmptyWalks("no walks to train on")
    if walks.ndim != 2:
        raise DataError("walks must be a 2-D array of equal-length sequences")
    if walks.min() < 0 or walks.max() >= n:
        raise NodeIdOutOfRange(f"walk node ids must lie in [0, {n})")
    syn0, syn1 = initial_vectors(n, cfg)
    noise, noise_ids = noise_table(walks, n)
    tokens = walks.shape[0] * walks.shape[1]
    total = float(tokens * cfg.epochs)
    history = []
    if threads > 1:
        import numba

        numba.set_num_threads(min(threads, numba.config.NUMBA_NUM_THREADS))
        epoch_fn = _epoch_parallel
    else:
        epoch_fn = _epoch_serial
    seed = np.uint64(cfg.seed & 0xFFFFFFFFFFFFFFFF)
    for epoch in range(cfg.epochs):
        loss, pairs = epoch_fn(walks, cfg.window, cfg.negatives, syn0, syn1,
                               noise.probabilities, noise.aliases, noise_ids, seed, epoch, cfg.lr_initial, cfg.lr_final, float(epoch * tokens),
                               total, CHUNK_WALKS)
        history.append(loss / max(pairs, 1))
    if not (np.all(np.isfinite(syn0)) and np.all(np.isfinite(syn1))):
        raise DataError("embedding diverged (non-finite values)")
    return Embedding(syn0, syn1, history)


def embed_graph(g, walk_cfg, train_cfg, threads=1) -> Embedding:
    from .walks import generate_walks

    return train_skipgram(generate_walks(g, walk_cfg), g.n, train_cfg, threads=threads)


def write_embedding(emb: Embedding, path) -> None:
    header = ["node_id"] + [f"e{k}" for k in range(emb.dims)]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i, row in enumerate(emb.matrix):
            writer.writerow([i] + [repr(float(x)) for x in row])


def read_embedding(path) -> Embedding:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "node_id" or header[1:] != [f"e{k}" for k in range(len(header) - 1)]:
            raise MalformedHeader(f"{path}: expected header node_id,e0,...")
        rows = [(int(r[0]), [float(x) for x in r[1:]]) for r in reader if r]
    ids = [i for i, _ in rows]
    if ids != list(range(len(rows))):
        raise DataError(f"{path}: node ids must be 0..n-1 in order")
    matrix = np.array([vals for _, vals in rows], dtype=np.float64).reshape(len(rows), len(header) - 1)
    return Embedding(matrix, np.zeros_like(matrix))
