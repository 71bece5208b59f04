"""Patient-grouped cross-validation and hyperparameter grid search."""
from __future__ import annotations

import csv
import itertools
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .._seed import derive_seed, pmap, rng_from
from ..augment import AugmentSpec, augment_children
from ..errors import ConfigError, DataError
from ..features import FeatureConfig, FeatureTable, extract_raw, feature_names, fit_config
from ..learners import RFParams, config_id, fit_model
from ..patchio import Dataset, resize_dataset
from .metrics import roc_auc, threshold_metrics

log = logging.getLogger(__name__)

METRICS = ("auc", "accuracy", "f1", "sensitivity", "specificity")
CSV_HEADER = ["config_id", "auc_mean", "auc_std", "acc_mean", "acc_std", "f1_mean", "f1_std",
              "sens_mean", "sens_std", "spec_mean", "spec_std", "cluster"]


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignment: dict          # patient_id -> fold index

    def fold_of(self, patient_id: str) -> int:
        return self.assignment[patient_id]

    def test_mask(self, fold: int, patient_ids: Sequence[str]) -> np.ndarray:
        return np.array([self.assignment[p] == fold for p in patient_ids])

    def patients(self, fold: int) -> list[str]:
        return sorted(p for p, f in self.assignment.items() if f == fold)


def _patient_classes(patient_ids, labels) -> dict:
    pos, tot = {}, {}
    for p, y in zip(patient_ids, labels):
        pos[p] = pos.get(p, 0) + int(y)
        tot[p] = tot.get(p, 0) + 1
    # majority label; a tie counts as positive
    return {p: int(2 * pos[p] >= tot[p]) for p in tot}


def make_folds(data, k: int = 5, seed: int = 0) -> FoldPlan:
    """Assign whole patients to ``k`` folds, balancing patient classes greedily.

    ``data`` is a Dataset or FeatureTable (anything with patient ids and labels).
    """
    if isinstance(data, Dataset):
        pids, labels = data.patient_ids, data.labels
    else:
        pids, labels = list(data.patient_ids), np.asarray(data.labels)
    cls = _patient_classes(pids, labels)
    if len(cls) < k:
        raise DataError(f"need at least {k} patients for {k}-fold CV, have {len(cls)}")
    if set(cls.values()) != {0, 1} and len(set(int(v) for v in labels)) < 2:
        raise DataError("cross-validation needs both classes")
    patients = sorted(cls)
    order = rng_from(seed, 0xF01D).permutation(len(patients))
    per_class = np.zeros((k, 2), dtype=int)
    assignment = {}
    for c in (1, 0):
        for i in order:
            p = patients[i]
            if cls[p] != c:
                continue
            # fewest of this class, then fewest patients overall, then lowest index
            f = min(range(k), key=lambda j: (per_class[j, c], per_class[j].sum(), j))
            assignment[p] = f
            per_class[f, c] += 1
    return FoldPlan(k, assignment)


@dataclass(frozen=True, eq=False)
class FoldResult:
    fold: int
    train_ids: tuple[str, ...]
    train_patients: tuple[str, ...]
    test_ids: tuple[str, ...]
    test_patients: tuple[str, ...]
    scores: np.ndarray
    labels: np.ndarray
    auc: float | None
    accuracy: float
    f1: float
    sensitivity: float
    specificity: float


@dataclass(frozen=True, eq=False)
class MetricSummary:
    config_id: str
    auc: tuple[float, float]
    accuracy: tuple[float, float]
    f1: tuple[float, float]
    sensitivity: tuple[float, float]
    specificity: tuple[float, float]
    skipped_auc_folds: tuple[int, ...] = ()
    folds: tuple[FoldResult, ...] = field(default=(), repr=False)
    cluster: int | None = None

    def means(self) -> np.ndarray:
        return np.array([getattr(self, m)[0] for m in METRICS])

    def with_cluster(self, c: int | None) -> "MetricSummary":
        return MetricSummary(self.config_id, self.auc, self.accuracy, self.f1, self.sensitivity,
                             self.specificity, self.skipped_auc_folds, self.folds, c)

    def row(self) -> list[str]:
        cells = [self.config_id]
        for m in METRICS:
            mean, sd = getattr(self, m)
            cells += [repr(float(mean)), repr(float(sd))]
        cells.append("" if self.cluster is None else str(self.cluster))
        return cells


def summarize(config: str, folds: Sequence[FoldResult]) -> MetricSummary:
    stats = {}
    for m in METRICS:
        vals = np.array([getattr(f, m) for f in folds if getattr(f, m) is not None], dtype=np.float64)
        stats[m] = (float(vals.mean()), float(vals.std())) if vals.size else (float("nan"), float("nan"))
    skipped = tuple(f.fold for f in folds if f.auc is None)
    return MetricSummary(config, stats["auc"], stats["accuracy"], stats["f1"], stats["sensitivity"],
                         stats["specificity"], skipped, tuple(folds))


def score_fold(fold, model_params, X_tr, y_tr, X_te, y_te, seed, names, ids, threads=None) -> FoldResult:
    model = fit_model(model_params, X_tr, y_tr, seed=derive_seed(seed, fold), feature_names=names,
                      threads=threads)
    scores = np.asarray(model.predict_proba(X_te), dtype=np.float64)
    auc = None
    if len(set(int(v) for v in y_te)) == 2:
        auc = roc_auc(scores, y_te)
    else:
        log.warning("fold %d: test portion has a single class, AUC skipped", fold)
    acc, f1, sens, spec = threshold_metrics(scores, y_te)
    train_ids, train_pat, test_ids, test_pat = ids
    return FoldResult(fold, tuple(train_ids), tuple(train_pat), tuple(test_ids), tuple(test_pat),
                      scores, np.asarray(y_te), auc, acc, f1, sens, spec)


def cross_validate_table(table: FeatureTable, model_params, plan: FoldPlan, feature_subset=None,
                         seed: int = 0, threads: int | None = None, cid: str | None = None) -> MetricSummary:
    """CV on a precomputed table. Augmented rows (ids containing '~') train only."""
    t = table.columns(list(feature_subset)) if feature_subset is not None else table
    X, y = t.X, t.y
    aug = t.augmented
    folds = []
    for f in range(plan.k):
        test_pat = plan.test_mask(f, t.patient_ids)
        tr = ~test_pat
        te = test_pat & ~aug
        ids = ([t.sample_ids[i] for i in np.flatnonzero(tr)], [t.patient_ids[i] for i in np.flatnonzero(tr)],
               [t.sample_ids[i] for i in np.flatnonzero(te)], [t.patient_ids[i] for i in np.flatnonzero(te)])
        folds.append(score_fold(f, model_params, X[tr], y[tr], X[te], y[te], seed, t.feature_names, ids,
                                threads))
    return summarize(cid or config_id(model_params), folds)


class FeatureCache:
    """Raw features of originals and their augmented children, computed once per sample.

    Children depend only on (seed, sample index, augmentation index), so a
    child computed for one fold is exactly the child another fold would get.
    """

    def __init__(self, d: Dataset, prep: str, config: FeatureConfig, augment: AugmentSpec | None,
                 seed: int, threads: int | None = None):
        self.d, self.prep, self.config, self.augment, self.seed = d, prep, config, augment, seed
        self.threads = threads
        self._orig = pmap(lambda s: extract_raw(s, prep, config), list(d), threads)
        self._kids: dict[int, list] = {}

    def original(self, i: int):
        return self._orig[i]

    def prepare_children(self, indices) -> None:
        todo = [i for i in indices if i not in self._kids]
        if not todo or self.augment is None or self.augment.per_sample_count == 0:
            return
        spec, seed, prep, config = self.augment, self.seed, self.prep, self.config

        def work(i):
            return [(c.sample_id, extract_raw(c, prep, config))
                    for c in augment_children(self.d.samples[i], i, spec, seed)]

        for i, kids in zip(todo, pmap(work, todo, self.threads)):
            self._kids[i] = kids

    def children(self, i: int) -> list:
        if self.augment is None or self.augment.per_sample_count == 0:
            return []
        self.prepare_children([i])
        return self._kids[i]


def cross_validate(d: Dataset, prep: str = "none", model_params=RFParams(), feature_subset=None,
                   k: int = 5, seed: int = 0, augment: AugmentSpec | None = AugmentSpec(),
                   config: FeatureConfig | None = None, plan: FoldPlan | None = None,
                   cache: FeatureCache | None = None, threads: int | None = None,
                   cid: str | None = None) -> MetricSummary:
    """Per fold: augment only the training patients, extract, train, score held-out originals."""
    d.require_trainable()
    config = config or FeatureConfig()
    plan = plan or make_folds(d, k, seed)
    cache = cache or FeatureCache(d, prep, config, augment, seed, threads)
    cache.prepare_children(range(len(d)))
    names = None
    subset_idx = None
    folds = []
    for f in range(plan.k):
        test = plan.test_mask(f, d.patient_ids)
        tr_idx, te_idx = np.flatnonzero(~test), np.flatnonzero(test)
        raws, ids, pats, ys = [], [], [], []
        for i in tr_idx:
            s = d.samples[i]
            raws.append(cache.original(i))
            ids.append(s.sample_id)
            for cid_, r in cache.children(i):
                raws.append(r)
                ids.append(cid_)
            pats += [s.patient_id] * (1 + len(cache.children(i)))
            ys += [s.label] * (1 + len(cache.children(i)))
        fc = config if config.lbp.var_edges is not None else fit_config(raws, config)
        if names is None:
            names = feature_names(fc)
            if feature_subset is not None:
                pos = {n: j for j, n in enumerate(names)}
                try:
                    subset_idx = [pos[n] for n in feature_subset]
                except KeyError as exc:
                    raise DataError(f"unknown feature {exc.args[0]!r}") from exc
                names = list(feature_subset)
        X_tr = np.array([r.assemble(fc) for r in raws])
        X_te = np.array([cache.original(i).assemble(fc) for i in te_idx])
        X_tr = np.where(np.isfinite(X_tr), X_tr, 0.0)
        X_te = np.where(np.isfinite(X_te), X_te, 0.0)
        if subset_idx is not None:
            X_tr, X_te = X_tr[:, subset_idx], X_te[:, subset_idx]
        y_te = d.labels[te_idx]
        fold_ids = (ids, pats, [d.samples[i].sample_id for i in te_idx], [d.samples[i].patient_id for i in te_idx])
        folds.append(score_fold(f, model_params, X_tr, np.array(ys), X_te, y_te, seed, names, fold_ids,
                                threads))
    return summarize(cid or config_id(model_params), folds)


# ---------------------------------------------------------------- grid search

@dataclass(frozen=True)
class GridCell:
    prep: str
    patch_size: int | None
    params: object

    @property
    def config_id(self) -> str:
        size = "native" if self.patch_size is None else str(self.patch_size)
        return f"{config_id(self.params)}|prep={self.prep}|size={size}"


def rf_grid(n_trees=(50, 100, 150), max_depth=(0, 20), min_samples_leaf=(2, 4),
            min_samples_split=(1, 20, 40), **fixed) -> list[RFParams]:
    return [RFParams(n_trees=t, max_depth=dp, min_samples_leaf=lf, min_samples_split=sp, **fixed)
            for t, dp, lf, sp in itertools.product(n_trees, max_depth, min_samples_leaf, min_samples_split)]


def make_grid(params: Sequence, preps=("none",), sizes=(None,)) -> list[GridCell]:
    return [GridCell(p, s, m) for p in preps for s in sizes for m in params]


def rank_summaries(summaries: Sequence[MetricSummary]) -> list[MetricSummary]:
    """Mean AUC descending, then mean accuracy descending, then config_id."""
    def key(s):
        auc = s.auc[0] if np.isfinite(s.auc[0]) else -np.inf
        acc = s.accuracy[0] if np.isfinite(s.accuracy[0]) else -np.inf
        return (-auc, -acc, s.config_id)
    return sorted(summaries, key=key)


def grid_search(d: Dataset, cells: Sequence[GridCell], k: int = 5, seed: int = 0,
                augment: AugmentSpec | None = AugmentSpec(), config: FeatureConfig | None = None,
                threads: int | None = None) -> list[MetricSummary]:
    if not cells:
        raise ConfigError("grid search needs at least one configuration")
    config = config or FeatureConfig()
    plan = make_folds(d, k, seed)
    out = []
    groups: dict = {}
    for c in cells:
        groups.setdefault((c.prep, c.patch_size), []).append(c)
    for (prep, size) in sorted(groups, key=lambda g: (g[0], -1 if g[1] is None else g[1])):
        dd = d if size is None else resize_dataset(d, size)
        cache = FeatureCache(dd, prep, config, augment, seed, threads)
        for c in groups[(prep, size)]:
            out.append(cross_validate(dd, prep, c.params, k=k, seed=seed, augment=augment, config=config,
                                      plan=plan, cache=cache, threads=threads, cid=c.config_id))
    return rank_summaries(out)


def write_metrics_csv(summaries: Sequence[MetricSummary], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for s in summaries:
            w.writerow(s.row())
    return path


def read_metrics_csv(path) -> list[MetricSummary]:
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot open metrics file {path}: {exc}") from exc
    out = []
    with fh:
        r = csv.reader(fh)
        if next(r, None) != CSV_HEADER:
            raise DataError(f"{path}: metrics header must be {','.join(CSV_HEADER)}")
        for row in r:
            if len(row) != len(CSV_HEADER):
                raise DataError(f"{path}: malformed metrics row")
            v = [float(x) for x in row[1:11]]
            out.append(MetricSummary(row[0], (v[0], v[1]), (v[2], v[3]), (v[4], v[5]), (v[6], v[7]),
                                     (v[8], v[9]), cluster=int(row[11]) if row[11] else None))
    return out
