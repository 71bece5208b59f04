"""k-means (k-means++ seeding, restarts) over standardized metric vectors."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .._seed import rng_from
from ..errors import DataError
from .cv import METRICS, MetricSummary


@dataclass(frozen=True, eq=False)
class ConfigCluster:
    config_ids: tuple[str, ...]
    labels: np.ndarray
    centroids: np.ndarray          # in standardized metric space
    inertia: float
    center: np.ndarray = field(repr=False)
    scale: np.ndarray = field(repr=False)

    def members(self, c: int) -> list[str]:
        return [cid for cid, lab in zip(self.config_ids, self.labels) if lab == c]

    def as_dict(self) -> dict:
        return dict(zip(self.config_ids, (int(v) for v in self.labels)))


def _sqdist(X, C):
    return ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)


def kmeans_pp(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centers = [X[rng.integers(n)]]
    for _ in range(1, k):
        d2 = _sqdist(X, np.array(centers)).min(axis=1)
        tot = d2.sum()
        if tot <= 0:
            centers.append(X[rng.integers(n)])
        else:
            centers.append(X[rng.choice(n, p=d2 / tot)])
    return np.array(centers)


def lloyd(X: np.ndarray, centers: np.ndarray, max_iter: int = 300):
    """Returns (labels, centers, inertia, inertia history)."""
    k = centers.shape[0]
    history = []
    labels = None
    for _ in range(max_iter):
        d2 = _sqdist(X, centers)
        new = d2.argmin(axis=1)
        history.append(float(d2[np.arange(X.shape[0]), new].sum()))
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        centers = centers.copy()
        for j in range(k):
            m = labels == j
            if m.any():
                centers[j] = X[m].mean(axis=0)
            else:
                # re-seed an empty cluster at the point worst served by its centre
                worst = int(d2[np.arange(X.shape[0]), labels].argmax())
                centers[j] = X[worst]
                labels = labels.copy()
                labels[worst] = j
    d2 = _sqdist(X, centers)
    labels = d2.argmin(axis=1)
    inertia = float(d2[np.arange(X.shape[0]), labels].sum())
    return labels, centers, inertia, history


def kmeans(X: np.ndarray, k: int, seed: int = 0, restarts: int = 20):
    X = np.asarray(X, dtype=np.float64)
    best = None
    for r in range(restarts):
        rng = rng_from(seed, r)
        res = lloyd(X, kmeans_pp(X, k, rng))
        if best is None or res[2] < best[2]:
            best = res
    return best


def cluster_configs(summaries: Sequence[MetricSummary], k: int = 3, seed: int = 0,
                    restarts: int = 20) -> ConfigCluster:
    """Cluster configurations on their five metric means, each dimension standardized.

    Cluster 0 is the one whose centroid has the highest mean AUC.
    """
    if len(summaries) < k:
        raise DataError(f"need at least {k} configurations to form {k} clusters, have {len(summaries)}")
    M = np.array([s.means() for s in summaries], dtype=np.float64)
    if not np.all(np.isfinite(M)):
        raise DataError("metric summaries contain undefined means")
    center = M.mean(axis=0)
    scale = M.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    Z = (M - center) / scale
    labels, cents, inertia, _ = kmeans(Z, k, seed, restarts)
    order = np.argsort(-cents[:, METRICS.index("auc")], kind="stable")
    remap = np.empty(k, dtype=int)
    remap[order] = np.arange(k)
    return ConfigCluster(tuple(s.config_id for s in summaries), remap[labels], cents[order], inertia,
                         center, scale)
