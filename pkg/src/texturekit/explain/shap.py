"""Shapley attributions for forests: exact TreeSHAP and a subset-enumeration oracle.

Both use the same value function: for a coalition S, walk the tree following
x on features in S and averaging children by their training-sample share on
all other features. Attributions are on the probability scale.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import DataError, ModelFormatError
from ..learners import ForestModel
from ..learners.tree import LEAF, Tree

BRUTEFORCE_MAX_FEATURES = 15


@dataclass(frozen=True, eq=False)
class ShapReport:
    sample_ids: tuple[str, ...]
    feature_names: tuple[str, ...]
    phi: np.ndarray            # (n_samples, n_features)
    base_value: float
    prediction: np.ndarray     # (n_samples,)
    feature_values: np.ndarray

    def mean_abs(self) -> np.ndarray:
        return np.abs(self.phi).mean(axis=0)

    def local_accuracy_error(self) -> float:
        return float(np.abs(self.base_value + self.phi.sum(axis=1) - self.prediction).max())

    def write_csv(self, path) -> Path:
        """Long format: ``sample_id,feature,phi,feature_value``."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["sample_id", "feature", "phi", "feature_value"])
            for sid, row, vals in zip(self.sample_ids, self.phi, self.feature_values):
                for name, p, v in zip(self.feature_names, row, vals):
                    w.writerow([sid, name, repr(float(p)), repr(float(v))])
        return path


def _check_forest(m: ForestModel) -> None:
    for t in m.trees:
        ns = getattr(t, "n_samples", None)
        if ns is None or ns.size != t.n_nodes or np.any(ns <= 0):
            raise ModelFormatError("model trees lack per-node training sample counts; cannot run TreeSHAP")


def _pack(m: ForestModel):
    offsets, parts = [], {k: [] for k in ("feature", "threshold", "left", "right", "value", "cover")}
    pos = 0
    for t in m.trees:
        offsets.append(pos)
        parts["feature"].append(t.feature)
        parts["threshold"].append(t.threshold)
        parts["left"].append(t.left)
        parts["right"].append(t.right)
        parts["value"].append(t.value)
        parts["cover"].append(t.n_samples.astype(np.float64))
        pos += t.n_nodes
    cat = {k: np.concatenate(v) for k, v in parts.items()}
    depths = np.array([t.depth() for t in m.trees], dtype=np.int64)
    return (np.asarray(offsets, dtype=np.int64), depths, cat["feature"].astype(np.int64), cat["threshold"],
            cat["left"].astype(np.int64), cat["right"].astype(np.int64), cat["value"], cat["cover"])


def _as_matrix(m: ForestModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != m.n_features:
        raise DataError(f"model expects {m.n_features} features, got {X.shape[1]}")
    return np.ascontiguousarray(np.where(np.isfinite(X), X, 0.0))


def treeshap_matrix(m: ForestModel, X) -> np.ndarray:
    from ._treeshap_kernel import forest_shap

    _check_forest(m)
    X = _as_matrix(m, X)
    return forest_shap(X, *_pack(m), m.n_features)


def treeshap(m: ForestModel, x, sample_id: str = "") -> ShapReport:
    """Exact path-dependent Shapley values for one feature vector."""
    X = _as_matrix(m, x)
    phi = treeshap_matrix(m, X)
    return ShapReport((sample_id,), m.feature_names, phi, m.expected_value(), m.predict_proba(X), X)


def explain_table(m: ForestModel, X, sample_ids: Sequence[str] | None = None) -> ShapReport:
    X = _as_matrix(m, X)
    ids = tuple(sample_ids) if sample_ids is not None else tuple(str(i) for i in range(X.shape[0]))
    return ShapReport(ids, m.feature_names, treeshap_matrix(m, X), m.expected_value(), m.predict_proba(X), X)


# ---------------------------------------------------------------- oracle

def tree_conditional_expectation(t: Tree, x: np.ndarray, coalition: frozenset | set, node: int = 0) -> float:
    f = int(t.feature[node])
    if f == LEAF:
        return float(t.value[node])
    l, r = int(t.left[node]), int(t.right[node])
    if f in coalition:
        return tree_conditional_expectation(t, x, coalition, l if x[f] <= t.threshold[node] else r)
    return (t.n_samples[l] * tree_conditional_expectation(t, x, coalition, l)
            + t.n_samples[r] * tree_conditional_expectation(t, x, coalition, r)) / t.n_samples[node]


def shap_bruteforce(m: ForestModel, x) -> np.ndarray:
    """Shapley values by enumerating all 2^n coalitions (n <= 15)."""
    _check_forest(m)
    n = m.n_features
    if n > BRUTEFORCE_MAX_FEATURES:
        raise ValueError(f"brute-force Shapley refuses {n} features (limit {BRUTEFORCE_MAX_FEATURES})")
    x = _as_matrix(m, x)[0]
    v = np.empty(1 << n)
    for mask in range(1 << n):
        S = frozenset(i for i in range(n) if mask >> i & 1)
        v[mask] = np.mean([tree_conditional_expectation(t, x, S) for t in m.trees])
    weights = [math.factorial(s) * math.factorial(n - s - 1) / math.factorial(n) for s in range(n)]
    phi = np.zeros(n)
    for i in range(n):
        bit = 1 << i
        for mask in range(1 << n):
            if mask & bit:
                continue
            phi[i] += weights[bin(mask).count("1")] * (v[mask | bit] - v[mask])
    return phi


# ---------------------------------------------------------------- summaries

@dataclass(frozen=True, eq=False)
class FeatureSummary:
    name: str
    mean_abs_phi: float
    phi: np.ndarray
    values: np.ndarray
    in_top: bool


def shap_summary(report: ShapReport, share: float = 0.9) -> list[FeatureSummary]:
    """Features ranked by mean |phi|, descending (ties by name).

    ``in_top`` marks the shortest prefix whose cumulative mean |phi| reaches
    ``share`` of the total.
    """
    ma = report.mean_abs()
    order = sorted(range(ma.size), key=lambda j: (-ma[j], report.feature_names[j]))
    total = ma.sum()
    out, cum, reached = [], 0.0, False
    for j in order:
        in_top = not reached and total > 0
        cum += ma[j]
        if total > 0 and cum >= share * total:
            reached = True
        out.append(FeatureSummary(report.feature_names[j], float(ma[j]), report.phi[:, j],
                                  report.feature_values[:, j], in_top))
    return out


def top_share(report: ShapReport, k: int) -> float:
    """Fraction of total mean |phi| carried by the k highest-ranked features."""
    ma = np.sort(report.mean_abs())[::-1]
    tot = ma.sum()
    return float(ma[:k].sum() / tot) if tot > 0 else 0.0


def write_summary_csv(summary: Sequence[FeatureSummary], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "feature", "mean_abs_phi", "in_top"])
        for r, s in enumerate(summary, start=1):
            w.writerow([r, s.name, repr(s.mean_abs_phi), int(s.in_top)])
    return path
