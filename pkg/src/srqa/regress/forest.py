"""Regression forest grown with log-variance-reduction splits.

Trees are stored flat (parallel node arrays) for fast prediction and a
deterministic serialized form. Split search runs through the selected
kernel backend (compiled extension or NumPy fallback).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from srqa.regress import kernels

VAR_FLOOR = 1e-9


@dataclass
class Tree:
    feature: np.ndarray    # int32; -1 marks a leaf
    threshold: np.ndarray  # float64; x[feature] <= threshold goes left
    left: np.ndarray       # int32 child ids
    right: np.ndarray
    value: np.ndarray      # float64 node means

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]


@dataclass
class Forest:
    trees: list
    feature_dim: int
    # Out-of-bag training predictions; populated by train_forest when
    # bootstrapping, not serialized.
    oob_prediction: np.ndarray | None = field(default=None, repr=False)


def _grow_tree(X, y, rng, min_leaf, n_candidates):
    n, d = X.shape
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        return len(feature) - 1

    root = new_node()
    stack = [(np.arange(n), root)]
    while stack:
        idx, nid = stack.pop()
        yn = y[idx]
        m = idx.shape[0]
        mean = float(yn.mean())
        value[nid] = mean
        if m < 2 * min_leaf:
            continue
        var = float(yn.var())
        if var <= 1e-12 * max(1.0, mean * mean):
            continue

        cands = rng.choice(d, size=min(n_candidates, d), replace=False)
        best_gain = -np.inf
        best_f = -1
        best_thr = 0.0
        for f in cands:
            xs = X[idx, f]
            order = np.argsort(xs, kind="stable")
            gain, thr = kernels.best_split(
                np.ascontiguousarray(xs[order]),
                np.ascontiguousarray(yn[order]),
                min_leaf,
                VAR_FLOOR,
            )
            if gain > best_gain:
                best_gain, best_f, best_thr = gain, int(f), thr
        if best_f < 0 or best_gain <= 0.0:
            continue

        feature[nid] = best_f
        threshold[nid] = best_thr
        lid = new_node()
        rid = new_node()
        left[nid] = lid
        right[nid] = rid
        go_left = X[idx, best_f] <= best_thr
        stack.append((idx[~go_left], rid))
        stack.append((idx[go_left], lid))

    return Tree(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        value=np.asarray(value, dtype=np.float64),
    )


def _tree_predict_many(tree: Tree, X: np.ndarray) -> np.ndarray:
    idx = np.zeros(X.shape[0], dtype=np.int64)
    while True:
        feat = tree.feature[idx]
        active = feat >= 0
        if not active.any():
            break
        rows = np.nonzero(active)[0]
        node = idx[rows]
        go_left = X[rows, feat[rows]] <= tree.threshold[node]
        idx[rows] = np.where(go_left, tree.left[node], tree.right[node])
    return tree.value[idx]


def train_forest(X, y, n_trees: int, *, min_leaf: int = 5,
                 n_candidates: int | None = None, subsample: float = 1.0,
                 bootstrap: bool = True, seed=0) -> Forest:
    """Train a forest of ``n_trees`` regression trees.

    Each tree sees a bootstrap draw of round(subsample*n) rows (all rows
    when ``bootstrap`` is false) and samples ceil(sqrt(d)) candidate
    features per node unless ``n_candidates`` overrides it. Splits maximize
    n*log(var) - n_L*log(var_L) - n_R*log(var_R) with variances floored at
    1e-9; recursion stops below 2*min_leaf samples or at zero variance.
    Deterministic given (data, seed).
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError(f"need a non-empty 2-D feature matrix, got shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise ValueError(f"targets {y.shape} do not match {X.shape[0]} rows")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("features and targets must be finite")
    if n_trees < 1:
        raise ValueError(f"n_trees must be >= 1, got {n_trees}")
    if min_leaf < 1:
        raise ValueError(f"min_leaf must be >= 1, got {min_leaf}")
    if not (0.0 < subsample <= 1.0):
        raise ValueError(f"subsample must be in (0, 1], got {subsample}")

    n, d = X.shape
    k = n_candidates if n_candidates is not None else math.ceil(math.sqrt(d))
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    streams = ss.spawn(n_trees)

    trees = []
    oob_sum = np.zeros(n)
    oob_cnt = np.zeros(n)
    for t in range(n_trees):
        rng = np.random.default_rng(streams[t])
        if bootstrap:
            m = max(1, int(round(subsample * n)))
            sample = rng.integers(0, n, size=m)
        else:
            sample = np.arange(n)
        tree = _grow_tree(X[sample], y[sample], rng, min_leaf, k)
        trees.append(tree)
        if bootstrap:
            out = np.ones(n, dtype=bool)
            out[sample] = False
            if out.any():
                oob_sum[out] += _tree_predict_many(tree, X[out])
                oob_cnt[out] += 1.0

    forest = Forest(trees=trees, feature_dim=d)
    if bootstrap:
        oob = np.empty(n)
        seen = oob_cnt > 0
        oob[seen] = oob_sum[seen] / oob_cnt[seen]
        if not seen.all():
            # rows in every bag fall back to the in-bag forest prediction
            oob[~seen] = predict_forest_many(forest, X[~seen])
        forest.oob_prediction = oob
    return forest


def predict_forest_many(forest: Forest, X) -> np.ndarray:
    """Forest predictions for an (n, d) feature matrix."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != forest.feature_dim:
        raise ValueError(
            f"expected (n, {forest.feature_dim}) features, got shape {X.shape}"
        )
    if not np.all(np.isfinite(X)):
        raise ValueError("features must be finite")
    acc = np.zeros(X.shape[0])
    for tree in forest.trees:
        acc += _tree_predict_many(tree, X)
    return acc / len(forest.trees)


def predict_forest(forest: Forest, x) -> float:
    """Mean of the tree outputs for a single feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (forest.feature_dim,):
        raise ValueError(f"expected {forest.feature_dim} features, got shape {x.shape}")
    return float(predict_forest_many(forest, x[None, :])[0])
