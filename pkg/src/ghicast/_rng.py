"""SplitMix64 stream usable from numba kernels.

State is a length-1 uint64 array so kernels can advance it in place. Streams are
derived from integer keys, which keeps results independent of thread count.
"""

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@njit(cache=True, nogil=True)
def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True, nogil=True)
def next_u64(state):
    state[0] = state[0] + _GOLDEN
    return _mix(state[0])


@njit(cache=True, nogil=True)
def uniform(state):
    """Float in [0, 1) with 53 random bits."""
    return np.float64(next_u64(state) >> _S11) * _INV53


@njit(cache=True, nogil=True)
def randbelow(state, n):
    """Integer in [0, n); n must be positive."""
    i = np.int64(uniform(state) * n)
    if i >= n:
        i = n - 1
    return i


@njit(cache=True, nogil=True)
def make_state(a, b, c):
    state = np.empty(1, dtype=np.uint64)
    state[0] = _mix(np.uint64(a) + _GOLDEN)
    state[0] = _mix(state[0] ^ np.uint64(b))
    state[0] = _mix(state[0] ^ (np.uint64(c) * _GOLDEN))
    return state


def stream(*keys):
    """Build a kernel RNG state from up to three non-negative integer keys."""
    padded = [int(k) & 0xFFFFFFFFFFFFFFFF for k in keys] + [0, 0, 0]
    return make_state(np.uint64(padded[0]), np.uint64(padded[1]), np.uint64(padded[2]))
