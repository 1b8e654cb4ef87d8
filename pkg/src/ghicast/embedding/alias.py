"""Alias-method sampling (Vose) for fixed discrete distributions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .. import _rng
from ..errors import EmptyWeights, NonPositiveWeight


@njit(cache=True, nogil=True)
def _build_into(weights, prob, alias):
    n = weights.shape[0]
    total = 0.0
    for i in range(n):
        total += weights[i]
    scaled = np.empty(n)
    small = np.empty(n, dtype=np.int64)
    large = np.empty(n, dtype=np.int64)
    ns = 0
    nl = 0
    for i in range(n):
        scaled[i] = weights[i] * n / total
        if scaled[i] < 1.0:
            small[ns] = i
            ns += 1
        else:
            large[nl] = i
            nl += 1
    while ns > 0 and nl > 0:
        ns -= 1
        s = small[ns]
        nl -= 1
        g = large[nl]
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = (scaled[g] + scaled[s]) - 1.0
        if scaled[g] < 1.0:
            small[ns] = g
            ns += 1
        else:
            large[nl] = g
            nl += 1
    # leftovers are 1 up to rounding
    while nl > 0:
        nl -= 1
        prob[large[nl]] = 1.0
        alias[large[nl]] = large[nl]
    while ns > 0:
        ns -= 1
        prob[small[ns]] = 1.0
        alias[small[ns]] = small[ns]


@njit(cache=True, nogil=True)
def draw(prob, alias, state):
    n = prob.shape[0]
    i = _rng.randbelow(state, n)
    if _rng.uniform(state) < prob[i]:
        return i
    return alias[i]


@dataclass(frozen=True)
class AliasTable:
    probabilities: np.ndarray
    aliases: np.ndarray

    def __len__(self):
        return len(self.probabilities)

    def sample(self, rng: np.random.Generator, size=None):
        """Draw indices using a numpy generator; vectorised over ``size``."""
        n = len(self.probabilities)
        i = rng.integers(0, n, size=size)
        u = rng.random(size=size)
        return np.where(u < self.probabilities[i], i, self.aliases[i])


def alias_build(weights) -> AliasTable:
    w = np.asarray(weights, dtype=np.float64).ravel()
    if w.size == 0:
        raise EmptyWeights("alias table needs at least one weight")
    if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
        raise NonPositiveWeight("alias weights must be finite and > 0")
    prob = np.empty(w.size)
    alias = np.empty(w.size, dtype=np.int64)
    _build_into(w, prob, alias)
    return AliasTable(prob, alias)


def alias_sample(table: AliasTable, rng: np.random.Generator, size=None):
    return table.sample(rng, size)
