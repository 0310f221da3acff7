"""Random forest of CART trees with Gini splits."""
from __future__ import annotations

import math

import numpy as np

from .. import kernels
from .base import Classifier


class Tree:
    """Flat array representation; ``left == -1`` marks a leaf."""

    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self, feature, threshold, left, right, value):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=np.float64)

    @property
    def vote(self):
        return (self.value >= 0.5).astype(np.float64)

    def apply(self, X):
        return kernels.tree_apply(np.ascontiguousarray(X), self.feature, self.threshold,
                                  self.left, self.right)

    def depth(self):
        d = np.zeros(self.left.size, dtype=np.int64)
        for i in range(self.left.size):
            if self.left[i] >= 0:
                d[self.left[i]] = d[self.right[i]] = d[i] + 1
        return int(d.max())


def build_tree(X, y, rng, max_depth=None, min_leaf=1, features_per_split=None) -> Tree:
    """Grow one CART tree on ``(X, y)`` (labels 0/1).

    At each node ``features_per_split`` columns are drawn without replacement;
    if none of them admits a split the remaining columns are tried before the
    node is closed. Candidate columns are scanned in index order and the first
    strict minimum wins.
    """
    n, d = X.shape
    k = d if features_per_split is None else max(1, min(int(features_per_split), d))
    yf = y.astype(np.float64)
    feature, threshold, left, right, value = [], [], [], [], []
    stack = [(np.arange(n), 0, -1, False)]
    while stack:
        idx, depth, parent, is_right = stack.pop()
        node = len(feature)
        if parent >= 0:
            (right if is_right else left)[parent] = node
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        p = float(yf[idx].mean())
        value.append(p)
        if p in (0.0, 1.0) or idx.size < 2 * min_leaf or (max_depth is not None and depth >= max_depth):
            continue
        perm = rng.permutation(d)
        col, thr = -1, 0.0
        for cand in (np.sort(perm[:k]), np.sort(perm[k:])):
            if cand.size == 0:
                continue
            sub = np.ascontiguousarray(X[np.ix_(idx, cand)])
            c, t, _ = kernels.best_split(sub, yf[idx], float(min_leaf))
            if c >= 0:
                col, thr = int(cand[c]), float(t)
                break
        if col < 0:
            continue
        feature[node] = col
        threshold[node] = thr
        go_left = X[idx, col] <= thr
        # right pushed first so the left subtree is numbered first
        stack.append((idx[~go_left], depth + 1, node, True))
        stack.append((idx[go_left], depth + 1, node, False))
    return Tree(feature, threshold, left, right, value)


class RandomForest(Classifier):
    """Bagged CART trees; the score is the fraction of trees voting drowsy."""

    kind = "rf"
    default_threshold = 0.5

    def __init__(self, n_trees=200, max_depth=None, min_leaf=1, features_per_split=None,
                 bootstrap=True, seed=0):
        self.n_trees = int(n_trees)
        self.max_depth = max_depth
        self.min_leaf = int(min_leaf)
        self.features_per_split = features_per_split
        self.bootstrap = bool(bootstrap)
        self.seed = int(seed)
        self.trees: list[Tree] = []

    def get_config(self):
        return {"n_trees": self.n_trees, "max_depth": self.max_depth, "min_leaf": self.min_leaf,
                "features_per_split": self.features_per_split, "bootstrap": self.bootstrap,
                "seed": self.seed}

    def fit(self, X, y, feature_names=None):
        X, y = self._check_fit_input(X, y, feature_names)
        n, d = X.shape
        k = self.features_per_split or math.ceil(math.sqrt(d))
        self.trees = []
        for child in np.random.SeedSequence(self.seed).spawn(self.n_trees):
            rng = np.random.default_rng(child)
            idx = rng.integers(0, n, n) if self.bootstrap else np.arange(n)
            self.trees.append(build_tree(X[idx], y[idx], rng, self.max_depth, self.min_leaf, k))
        return self

    def _scores(self, X):
        X = np.ascontiguousarray(X)
        votes = np.zeros(X.shape[0])
        for tree in self.trees:
            votes += tree.vote[tree.apply(X)]
        return votes / len(self.trees)

    def _params(self):
        return {"trees": [{"feature": t.feature, "threshold": t.threshold, "left": t.left,
                           "right": t.right, "value": t.value} for t in self.trees]}

    def _set_params(self, params):
        self.trees = [Tree(**t) for t in params["trees"]]


def fit_rf(examples, config=None) -> RandomForest:
    return RandomForest(**(config or {})).fit_examples(examples)
