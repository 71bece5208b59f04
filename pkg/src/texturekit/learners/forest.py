"""Random forests of Gini trees with schedule-independent seeding."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace

import numpy as np

from .._seed import derive_seed, pmap
from ..errors import DataError
from .tree import RFParams, Tree, train_tree


def fingerprint(X: np.ndarray, y: np.ndarray) -> str:
    h = hashlib.sha256()
    X = np.ascontiguousarray(X, dtype="<f8")
    h.update(np.array(X.shape, dtype="<i8").tobytes())
    h.update(X.tobytes())
    h.update(np.ascontiguousarray(y, dtype="<i8").tobytes())
    return h.hexdigest()


@dataclass(eq=False)
class ForestModel:
    trees: list[Tree]
    params: RFParams
    feature_names: tuple[str, ...]
    train_fingerprint: str = ""
    extra: dict = field(default_factory=dict)

    kind = "random_forest"

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def _check(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.n_features:
            raise DataError(f"model expects {self.n_features} features, got {X.shape[1]}")
        return np.where(np.isfinite(X), X, 0.0)

    def predict_proba(self, X) -> np.ndarray:
        """Mean leaf probability over trees, one value per row."""
        X = self._check(X)
        acc = np.zeros(X.shape[0])
        for t in self.trees:
            acc += t.predict(X)
        return acc / len(self.trees)

    def expected_value(self) -> float:
        """Training-distribution mean output, weighting leaves by their sample share."""
        vals = []
        for t in self.trees:
            leaf = t.is_leaf
            vals.append(float((t.value[leaf] * t.n_samples[leaf]).sum() / t.n_samples[0]))
        return float(np.mean(vals))

    def used_features(self) -> set[int]:
        out: set[int] = set()
        for t in self.trees:
            out |= t.used_features()
        return out


def class_weights(y: np.ndarray, mode: str | None) -> np.ndarray | None:
    if mode is None:
        return None
    counts = np.bincount(y, minlength=2).astype(np.float64)
    per_class = np.where(counts > 0, y.size / (2.0 * np.maximum(counts, 1)), 0.0)
    return per_class[y]


def train_one(X, y, params: RFParams, seed: int, index: int, weights=None) -> Tree:
    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, index)))
    n = X.shape[0]
    rows = rng.integers(0, n, size=n) if params.bootstrap else np.arange(n)
    rows.sort()
    w = None if weights is None else weights[rows]
    return train_tree(X[rows], y[rows], params, row_weights=w, rng=rng)


def train_forest(X, y, params: RFParams = RFParams(), seed: int | None = None,
                 feature_names=None, threads: int | None = None) -> ForestModel:
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y).astype(np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DataError("cannot train a forest on an empty design matrix")
    seed = params.seed if seed is None else seed
    params = replace(params, seed=int(seed))
    weights = class_weights(y, params.class_weight)
    trees = pmap(lambda t: train_one(X, y, params, seed, t, weights), range(params.n_trees), threads)
    names = tuple(feature_names) if feature_names is not None else tuple(f"f{i}" for i in range(X.shape[1]))
    if len(names) != X.shape[1]:
        raise DataError("feature_names length does not match X")
    return ForestModel(trees, params, names, fingerprint(X, y))
