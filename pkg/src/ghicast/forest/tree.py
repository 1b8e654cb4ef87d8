"""CART regression trees stored as flat node arrays."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .. import _rng

LEAF = -1


@dataclass
class Tree:
    """Node ``i`` is a leaf when ``feature[i] == -1``; otherwise rows with
    ``x[feature] <= threshold`` go to ``left[i]``, the rest to ``right[i]``."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    count: np.ndarray
    importance: np.ndarray

    @property
    def n_nodes(self):
        return len(self.feature)

    @property
    def n_leaves(self):
        return int(np.sum(self.feature == LEAF))

    def depth(self) -> int:
        best = 0
        stack = [(0, 0)]
        while stack:
            node, d = stack.pop()
            best = max(best, d)
            if self.feature[node] != LEAF:
                stack.append((int(self.left[node]), d + 1))
                stack.append((int(self.right[node]), d + 1))
        return best

    def apply(self, X) -> np.ndarray:
        """Leaf index reached by each row."""
        return _apply(self.feature, self.threshold, self.left, self.right, np.asarray(X, dtype=np.float64))

    def predict(self, X) -> np.ndarray:
        return self.value[self.apply(X)]


@njit(cache=True, nogil=True)
def _apply(feature, threshold, left, right, X):
    out = np.empty(X.shape[0], dtype=np.int64)
    for r in range(X.shape[0]):
        node = 0
        while feature[node] != -1:
            if X[r, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[r] = node
    return out


@njit(cache=True, nogil=True)
def _grow(X, y, idx, mtry, min_leaf, max_depth, state):
    n = idx.shape[0]
    p = X.shape[1]
    cap = 2 * n + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    value = np.zeros(cap)
    count = np.zeros(cap, dtype=np.int64)
    importance = np.zeros(p)

    st_start = np.empty(cap, dtype=np.int64)
    st_end = np.empty(cap, dtype=np.int64)
    st_depth = np.empty(cap, dtype=np.int64)
    st_node = np.empty(cap, dtype=np.int64)
    top = 0
    st_start[0] = 0
    st_end[0] = n
    st_depth[0] = 0
    st_node[0] = 0
    top = 1
    n_nodes = 1

    perm = np.arange(p)
    vals = np.empty(n)
    buf = np.empty(n, dtype=np.int64)

    while top > 0:
        top -= 1
        start = st_start[top]
        end = st_end[top]
        depth = st_depth[top]
        node = st_node[top]
        m = end - start

        s = 0.0
        ss = 0.0
        ymin = np.inf
        ymax = -np.inf
        for i in range(start, end):
            yi = y[idx[i]]
            s += yi
            ss += yi * yi
            ymin = min(ymin, yi)
            ymax = max(ymax, yi)
        value[node] = s / m
        count[node] = m
        if (max_depth >= 0 and depth >= max_depth) or m < 2 * min_leaf or ymax == ymin:
            continue

        # score on centred targets; near-equal scores count as ties so that
        # summation order cannot break them
        mean = s / m
        sc = 0.0
        for i in range(start, end):
            sc += y[idx[i]] - mean
        node_sse = ss - s * mean
        tol = 1e-10 * max(node_sse, 1e-300)
        best_score = -np.inf
        best_f = -1
        best_thr = 0.0
        evaluated = 0
        for j in range(p):
            if evaluated >= mtry:
                break
            r = j + _rng.randbelow(state, p - j)
            tmp = perm[j]
            perm[j] = perm[r]
            perm[r] = tmp
            f = perm[j]
            vmin = np.inf
            vmax = -np.inf
            for i in range(m):
                v = X[idx[start + i], f]
                vals[i] = v
                vmin = min(vmin, v)
                vmax = max(vmax, v)
            if vmin == vmax:
                continue
            evaluated += 1
            order = np.argsort(vals[:m], kind="mergesort")
            sl = 0.0
            for i in range(m - 1):
                sl += y[idx[start + order[i]]] - mean
                nl = i + 1
                v0 = vals[order[i]]
                v1 = vals[order[i + 1]]
                if v0 == v1 or nl < min_leaf or m - nl < min_leaf:
                    continue
                sr = sc - sl
                score = sl * sl / nl + sr * sr / (m - nl)
                thr = 0.5 * (v0 + v1)
                if thr == v1:
                    thr = v0
                if score > best_score + tol or (
                    score >= best_score - tol and (f < best_f or (f == best_f and thr < best_thr))
                ):
                    best_score = score
                    best_f = f
                    best_thr = thr
        if best_f < 0:
            continue

        # stable partition of idx[start:end]
        nl = 0
        nr = 0
        for i in range(start, end):
            if X[idx[i], best_f] <= best_thr:
                idx[start + nl] = idx[i]
                nl += 1
            else:
                buf[nr] = idx[i]
                nr += 1
        for i in range(nr):
            idx[start + nl + i] = buf[i]

        gain = best_score - sc * sc / m
        if gain > 0:
            importance[best_f] += gain

        feature[node] = best_f
        threshold[node] = best_thr
        li = n_nodes
        ri = n_nodes + 1
        n_nodes += 2
        left[node] = li
        right[node] = ri
        # push right first so the left subtree is numbered first
        st_start[top] = start + nl
        st_end[top] = end
        st_depth[top] = depth + 1
        st_node[top] = ri
        top += 1
        st_start[top] = start
        st_end[top] = start + nl
        st_depth[top] = depth + 1
        st_node[top] = li
        top += 1

    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), value[:n_nodes].copy(), count[:n_nodes].copy(), importance)


@njit(cache=True, nogil=True)
def _bootstrap(n, state):
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        out[i] = _rng.randbelow(state, n)
    return out


def fit_tree(X, y, rng_state, mtry=None, min_leaf=1, max_depth=None, sample_idx=None) -> Tree:
    """Grow one regression tree on rows ``sample_idx`` (all rows by default).

    At each node ``mtry`` non-constant features are drawn in random order and the
    split minimising the summed child squared error is taken; ties go to the
    lowest feature index, then the lowest threshold. Thresholds are midpoints
    between consecutive distinct sorted values.
    """
    from ..errors import EmptyTrainingSet

    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyTrainingSet("no rows to fit")
    if len(y) != X.shape[0]:
        raise ValueError("X and y lengths differ")
    p = X.shape[1]
    mtry = p if mtry is None else int(min(max(1, mtry), p))
    idx = np.arange(X.shape[0], dtype=np.int64) if sample_idx is None else np.array(sample_idx, dtype=np.int64)
    if len(idx) == 0:
        raise EmptyTrainingSet("no rows to fit")
    depth = -1 if max_depth is None else int(max_depth)
    return Tree(*_grow(X, y, idx, mtry, int(min_leaf), depth, rng_state))


def tree_to_dict(tree: Tree, node=0) -> dict:
    if tree.feature[node] == LEAF:
        return {"prediction": float(tree.value[node]), "count": int(tree.count[node])}
    return {
        "feature": int(tree.feature[node]),
        "threshold": float(tree.threshold[node]),
        "left": tree_to_dict(tree, int(tree.left[node])),
        "right": tree_to_dict(tree, int(tree.right[node])),
    }


def tree_from_dict(d: dict, n_features: int) -> Tree:
    feature, threshold, left, right, value, count = [], [], [], [], [], []

    def visit(nd):
        i = len(feature)
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        count.append(0)
        if "prediction" in nd:
            value[i] = float(nd["prediction"])
            count[i] = int(nd["count"])
        else:
            feature[i] = int(nd["feature"])
            threshold[i] = float(nd["threshold"])
            left[i] = visit(nd["left"])
            right[i] = visit(nd["right"])
        return i

    visit(d)
    return Tree(
        np.array(feature, dtype=np.int64),
        np.array(threshold),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(value),
        np.array(count, dtype=np.int64),
        np.zeros(n_features),
    )
