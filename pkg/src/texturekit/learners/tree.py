"""CART-style binary classification trees grown on Gini impurity.

Trees are stored as flat arrays (preorder node ids) so they serialize cleanly
and can be walked by vectorized prediction and by the TreeSHAP kernels.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import ConfigError, DataError
from ._split_kernel import best_split

LEAF = -1
RF_GRID = {
    "n_trees": (50, 100, 150),
    "max_depth": (0, 20),
    "min_samples_leaf": (2, 4),
    "min_samples_split": (1, 20, 40),
}


@dataclass(frozen=True)
class RFParams:
    n_trees: int = 100
    max_depth: int = 0                  # 0 = unlimited
    min_samples_leaf: int = 2
    min_samples_split: int = 1          # 1 = no constraint beyond min_samples_leaf
    features_per_split: str | int | float = "sqrt"
    bootstrap: bool = True
    class_weight: str | None = None     # None or "balanced"
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ConfigError("n_trees must be >= 1")
        if self.max_depth < 0:
            raise ConfigError("max_depth must be >= 0 (0 means unlimited)")
        if self.min_samples_leaf < 1 or self.min_samples_split < 1:
            raise ConfigError("min_samples_leaf and min_samples_split must be >= 1")
        if self.class_weight not in (None, "balanced"):
            raise ConfigError(f"class_weight must be None or 'balanced', got {self.class_weight!r}")
        fps = self.features_per_split
        if isinstance(fps, str) and fps not in ("sqrt", "all"):
            raise ConfigError(f"features_per_split must be 'sqrt', 'all', an int or a fraction, got {fps!r}")

    def n_candidates(self, n_features: int) -> int:
        fps = self.features_per_split
        if fps == "sqrt":
            k = math.ceil(math.sqrt(n_features))
        elif fps == "all":
            k = n_features
        elif isinstance(fps, float) and 0 < fps <= 1:
            k = math.ceil(fps * n_features)
        else:
            k = int(fps)
        return max(1, min(n_features, k))

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def config_id(self) -> str:
        return f"rf-t{self.n_trees}-d{self.max_depth}-l{self.min_samples_leaf}-s{self.min_samples_split}"


@dataclass(eq=False)
class Tree:
    feature: np.ndarray      # int, LEAF for leaves
    threshold: np.ndarray    # x <= threshold goes left
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray        # positive-class probability (meaningful at leaves, kept at all nodes)
    n_samples: np.ndarray    # training rows reaching the node

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    @property
    def is_leaf(self) -> np.ndarray:
        return self.feature == LEAF

    def depth(self) -> int:
        d = np.zeros(self.n_nodes, dtype=int)
        for i in range(self.n_nodes):
            if self.feature[i] != LEAF:
                d[self.left[i]] = d[self.right[i]] = d[i] + 1
        return int(d.max())

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by every row of X."""
        X = np.atleast_2d(X)
        node = np.zeros(X.shape[0], dtype=np.intp)
        rows = np.arange(X.shape[0])
        active = self.feature[node] != LEAF
        while active.any():
            r, nd = rows[active], node[active]
            go_left = X[r, self.feature[nd]] <= self.threshold[nd]
            node[r] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] != LEAF
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def used_features(self) -> set[int]:
        return set(int(f) for f in self.feature[self.feature != LEAF])

    def to_dict(self) -> dict:
        return {
            "feature": [int(v) for v in self.feature],
            "threshold": [float(v) for v in self.threshold],
            "left": [int(v) for v in self.left],
            "right": [int(v) for v in self.right],
            "value": [float(v) for v in self.value],
            "n_samples": [int(v) for v in self.n_samples],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        t = cls(np.asarray(d["feature"], dtype=np.intp), np.asarray(d["threshold"], dtype=np.float64),
                np.asarray(d["left"], dtype=np.intp), np.asarray(d["right"], dtype=np.intp),
                np.asarray(d["value"], dtype=np.float64), np.asarray(d["n_samples"], dtype=np.int64))
        t.validate()
        return t

    def validate(self, n_features: int | None = None) -> None:
        n = self.n_nodes
        if not all(a.size == n for a in (self.threshold, self.left, self.right, self.value, self.n_samples)):
            raise DataError("tree arrays have inconsistent lengths")
        internal = self.feature != LEAF
        if internal.any():
            kids = np.concatenate([self.left[internal], self.right[internal]])
            if kids.min() <= 0 or kids.max() >= n:
                raise DataError("tree child index out of range")
            if np.any(self.n_samples[self.left[internal]] + self.n_samples[self.right[internal]]
                      != self.n_samples[internal]):
                raise DataError("tree child sample counts do not sum to their parent's")
            if n_features is not None and self.feature[internal].max() >= n_features:
                raise DataError("tree references a feature index beyond the model's feature count")
        if np.any((self.value < 0) | (self.value > 1)):
            raise DataError("tree leaf probabilities must lie in [0, 1]")


def gini(pos_weight: float, weight: float) -> float:
    if weight <= 0:
        return 0.0
    p = pos_weight / weight
    return 2.0 * p * (1.0 - p)


def train_tree(X, y, params: RFParams = RFParams(), row_weights=None, seed: int = 0,
               rng: np.random.Generator | None = None) -> Tree:
    """Grow one tree on all rows of X (any resampling is the caller's business)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y).astype(np.int64)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise DataError("cannot train a tree on an empty design matrix")
    if y.shape[0] != X.shape[0]:
        raise DataError("X and y disagree in length")
    if not np.all(np.isfinite(X)):
        raise DataError("design matrix has non-finite values; impute before training")
    n, n_feat = X.shape
    w = np.ones(n) if row_weights is None else np.asarray(row_weights, dtype=np.float64)
    yw = w * y
    rng = rng if rng is not None else np.random.Generator(np.random.PCG64(seed))
    mtry = params.n_candidates(n_feat)
    min_leaf = params.min_samples_leaf
    min_split = max(params.min_samples_split, 2 * min_leaf)

    feature, threshold, left, right, value, count = [], [], [], [], [], []
    stack = [(np.arange(n), 0, -1, False)]
    while stack:
        idx, depth, parent, is_left = stack.pop()
        nid = len(feature)
        if parent >= 0:
            (left if is_left else right)[parent] = nid
        W = w[idx].sum()
        P = yw[idx].sum()
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append(P / W if W > 0 else 0.0)
        count.append(idx.size)

        ys = y[idx]
        pure = ys.min() == ys.max()
        if pure or idx.size < min_split or (params.max_depth and depth >= params.max_depth):
            continue
        feats = np.arange(n_feat) if mtry == n_feat else np.sort(rng.choice(n_feat, mtry, replace=False))
        col, thr, imp = best_split(X, idx, feats, yw, w, min_leaf)
        if col < 0:
            continue
        if not imp < gini(P, W):
            continue
        f = int(feats[col])
        go_left = X[idx, f] <= thr
        feature[nid] = f
        threshold[nid] = thr
        # right pushed first so the left subtree gets the next preorder ids
        stack.append((idx[~go_left], depth + 1, nid, False))
        stack.append((idx[go_left], depth + 1, nid, True))

    tree = Tree(np.array(feature, dtype=np.intp), np.array(threshold), np.array(left, dtype=np.intp),
                np.array(right, dtype=np.intp), np.array(value), np.array(count, dtype=np.int64))
    return tree
