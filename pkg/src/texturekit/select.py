"""Sequential backward floating selection with cross-validated AUC as criterion.

Selection runs once on the whole training design with a fixed fold plan, not
inside each CV fold, so the reported criterion is optimistic.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from ._seed import pmap
from .errors import ConfigError, DataError
from .evaluate import FoldPlan, cross_validate_table
from .features import FeatureTable

log = logging.getLogger(__name__)

REMOVE = "remove"
CONDITIONAL_ADD = "conditional_add"
ADD_MARGIN = 1e-6
TRACE_HEADER = ["step", "action", "feature", "subset_size", "criterion"]


@dataclass(frozen=True)
class Step:
    action: str
    feature: str
    subset_size: int
    criterion: float


@dataclass
class SelectionTrace:
    feature_names: tuple[str, ...]
    full_criterion: float
    steps: list[Step] = field(default_factory=list)
    evaluations: list[tuple[tuple[str, ...], float]] = field(default_factory=list)
    best_subset_per_size: dict[int, tuple[tuple[str, ...], float]] = field(default_factory=dict)

    @property
    def final_subset(self) -> tuple[str, ...]:
        size = max(self.best_subset_per_size,
                   key=lambda k: (self.best_subset_per_size[k][1], -k))
        return self.best_subset_per_size[size][0]

    @property
    def final_criterion(self) -> float:
        return self.best_subset_per_size[len(self.final_subset)][1]

    def write_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_HEADER)
            for i, s in enumerate(self.steps, start=1):
                w.writerow([i, s.action, s.feature, s.subset_size, repr(float(s.criterion))])
        return path

    def write_subset(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("".join(n + "\n" for n in self.final_subset))
        return path


def read_subset(path) -> list[str]:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read feature subset {path}: {exc}") from exc
    names = [ln.strip() for ln in lines if ln.strip()]
    if not names:
        raise DataError(f"{path}: empty feature subset")
    return names


def cv_auc_criterion(table: FeatureTable, model_params, plan: FoldPlan, seed: int = 0) -> Callable:
    """Mean CV AUC over folds where it is defined."""
    def crit(subset: Sequence[str]) -> float:
        s = cross_validate_table(table, model_params, plan, feature_subset=subset, seed=seed, threads=1)
        return s.auc[0]
    return crit


def correlation_prefilter(table: FeatureTable, threshold: float = 0.98) -> list[str]:
    """Keep the first feature (table order) of every group with |r| > threshold."""
    from .explain import pearson_matrix

    cm = pearson_matrix(table)
    kept: list[int] = []
    for j in range(len(table.feature_names)):
        if cm.valid_mask[j] and any(abs(cm.r[j, k]) > threshold for k in kept if cm.valid_mask[k]):
            continue
        kept.append(j)
    dropped = len(table.feature_names) - len(kept)
    if dropped:
        log.info("correlation prefilter dropped %d of %d features", dropped, len(table.feature_names))
    return [table.feature_names[j] for j in kept]


def sbfs(table: FeatureTable, model_params, fold_plan: FoldPlan, min_size: int = 1, patience: int = 20,
         seed: int = 0, threads: int | None = None, criterion: Callable | None = None,
         features: Sequence[str] | None = None) -> SelectionTrace:
    """Backward floating search from ``features`` (default: every column).

    Each step removes the feature whose removal gives the highest criterion
    (ties: the lexicographically smallest name), then re-adds previously
    removed features while that beats the best criterion seen at the larger
    size by more than ``ADD_MARGIN``. Stops at ``min_size`` or after
    ``patience`` consecutive sizes whose best criterion falls below the best
    so far. A subset whose evaluation fails scores 0.
    """
    names = list(features) if features is not None else list(table.feature_names)
    order = {n: i for i, n in enumerate(table.feature_names)}
    unknown = [n for n in names if n not in order]
    if unknown:
        raise DataError(f"unknown feature {unknown[0]!r}")
    if len(names) < 2:
        raise ConfigError("selection needs at least two features")
    if min_size < 1 or patience < 1:
        raise ConfigError("min_size and patience must be >= 1")
    crit_fn = criterion or cv_auc_criterion(table, model_params, fold_plan, seed)
    cache: dict[frozenset, float] = {}

    def canon(fs) -> tuple[str, ...]:
        return tuple(sorted(fs, key=order.__getitem__))

    def evaluate(subsets: list[tuple[str, ...]]) -> list[float]:
        todo = [s for s in dict.fromkeys(subsets) if frozenset(s) not in cache]

        def one(s):
            try:
                v = float(crit_fn(list(s)))
            except Exception as exc:    # scored 0 per contract, never silently
                log.warning("criterion failed on a %d-feature subset: %s", len(s), exc)
                return 0.0
            if not np.isfinite(v):
                log.warning("criterion undefined on a %d-feature subset, scored 0", len(s))
                return 0.0
            return v

        for s, v in zip(todo, pmap(one, todo, threads)):
            cache[frozenset(s)] = v
            trace.evaluations.append((s, v))
        return [cache[frozenset(s)] for s in subsets]

    current = canon(names)
    trace = SelectionTrace(current, 0.0)
    full = evaluate([current])[0]
    trace.full_criterion = full
    trace.best_subset_per_size[len(current)] = (current, full)
    global_best, stale = full, 0

    while len(current) > min_size and stale < patience:
        cands = [canon(set(current) - {f}) for f in current]
        scores = evaluate(cands)
        j = min(range(len(current)), key=lambda i: (-scores[i], current[i]))
        removed, current, score = current[j], cands[j], scores[j]
        trace.steps.append(Step(REMOVE, removed, len(current), score))
        _offer(trace, current, score)

        while len(current) < len(names):
            outside = [n for n in names if n not in current]
            cands = [canon(set(current) | {f}) for f in outside]
            scores = evaluate(cands)
            best_i = min(range(len(outside)), key=lambda i: (-scores[i], outside[i]))
            prev = trace.best_subset_per_size.get(len(current) + 1, ((), -np.inf))[1]
            if scores[best_i] <= prev + ADD_MARGIN:
                break
            current, score = cands[best_i], scores[best_i]
            trace.steps.append(Step(CONDITIONAL_ADD, outside[best_i], len(current), score))
            _offer(trace, current, score)

        size_best = trace.best_subset_per_size[len(current)][1]
        if size_best >= global_best:
            global_best, stale = size_best, 0
        else:
            stale += 1
    return trace


def _offer(trace: SelectionTrace, subset: tuple[str, ...], score: float) -> None:
    k = len(subset)
    if k not in trace.best_subset_per_size or score > trace.best_subset_per_size[k][1]:
        trace.best_subset_per_size[k] = (subset, score)
