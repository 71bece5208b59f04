"""Feature tables: one row per sample, canonical column order, CSV persistence."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .._seed import pmap
from ..errors import DataError
from ..patchio import Dataset
from .extract import FeatureConfig, RawFeatures, extract_raw, feature_names
from .lbp import fit_var_edges

log = logging.getLogger(__name__)

ID_COLUMNS = ("sample_id", "patient_id", "label")
AUG_SEP = "~"


@dataclass(frozen=True, eq=False)
class FeatureTable:
    sample_ids: tuple[str, ...]
    patient_ids: tuple[str, ...]
    labels: np.ndarray
    values: np.ndarray                     # NaN where a feature could not be computed
    feature_names: tuple[str, ...]
    imputed_columns: tuple[str, ...] = ()
    config: FeatureConfig | None = field(default=None, compare=False)

    def __post_init__(self):
        n, f = self.values.shape
        if len(self.sample_ids) != n or len(self.patient_ids) != n or len(self.labels) != n:
            raise DataError("feature table id columns and value rows disagree in length")
        if len(self.feature_names) != f:
            raise DataError("feature table header and value columns disagree in length")

    def __len__(self) -> int:
        return len(self.sample_ids)

    @property
    def missing_mask(self) -> np.ndarray:
        return ~np.isfinite(self.values)

    @property
    def X(self) -> np.ndarray:
        """Values with missing entries imputed as 0."""
        return np.where(self.missing_mask, 0.0, self.values)

    @property
    def y(self) -> np.ndarray:
        return np.asarray(self.labels, dtype=np.int64)

    @property
    def augmented(self) -> np.ndarray:
        return np.array([AUG_SEP in s for s in self.sample_ids])

    @property
    def parent_ids(self) -> list[str]:
        return [s.split(AUG_SEP, 1)[0] for s in self.sample_ids]

    def impute(self) -> "FeatureTable":
        cols = tuple(n for n, m in zip(self.feature_names, self.missing_mask.any(axis=0)) if m)
        if cols:
            log.info("imputing 0 for columns with missing values: %s", ", ".join(cols))
        return replace(self, values=self.X, imputed_columns=cols)

    def rows(self, idx) -> "FeatureTable":
        idx = np.asarray(idx)
        if idx.dtype == bool:
            idx = np.flatnonzero(idx)
        return replace(self, sample_ids=tuple(self.sample_ids[i] for i in idx),
                       patient_ids=tuple(self.patient_ids[i] for i in idx),
                       labels=self.y[idx], values=self.values[idx])

    def columns(self, names: Sequence[str]) -> "FeatureTable":
        pos = {n: i for i, n in enumerate(self.feature_names)}
        try:
            idx = [pos[n] for n in names]
        except KeyError as exc:
            raise DataError(f"unknown feature {exc.args[0]!r}") from exc
        return replace(self, values=self.values[:, idx], feature_names=tuple(names),
                       imputed_columns=tuple(c for c in self.imputed_columns if c in set(names)))

    def write_csv(self, path, missing_as_empty: bool = True) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        vals = self.values if missing_as_empty else self.X
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([*ID_COLUMNS, *self.feature_names])
            for sid, pid, lab, row in zip(self.sample_ids, self.patient_ids, self.y, vals):
                w.writerow([sid, pid, int(lab), *(repr(float(v)) if np.isfinite(v) else "" for v in row)])
        return path

    @classmethod
    def read_csv(cls, path) -> "FeatureTable":
        path = Path(path)
        try:
            fh = open(path, newline="")
        except OSError as exc:
            raise DataError(f"cannot open feature table {path}: {exc}") from exc
        with fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(header[:3]) != ID_COLUMNS or len(header) < 4:
                raise DataError(f"{path}: feature table must start with {','.join(ID_COLUMNS)}")
            names = tuple(header[3:])
            sids, pids, labels, rows = [], [], [], []
            for lineno, row in enumerate(reader, start=2):
                if len(row) != len(header):
                    raise DataError(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
                if row[2] not in ("0", "1"):
                    raise DataError(f"{path}:{lineno}: label must be 0 or 1")
                sids.append(row[0])
                pids.append(row[1])
                labels.append(int(row[2]))
                try:
                    rows.append([float(c) if c != "" else np.nan for c in row[3:]])
                except ValueError as exc:
                    raise DataError(f"{path}:{lineno}: {exc}") from exc
        values = np.array(rows, dtype=np.float64).reshape(len(rows), len(names))
        return cls(tuple(sids), tuple(pids), np.array(labels, dtype=np.int64), values, names)


def raw_features(d: Dataset, prep: str, config: FeatureConfig, threads: int | None = None) -> list[RawFeatures]:
    return pmap(lambda s: extract_raw(s, prep, config), list(d), threads)


def table_from_raw(d: Dataset, raws: Sequence[RawFeatures], config: FeatureConfig) -> FeatureTable:
    values = np.array([r.assemble(config) for r in raws], dtype=np.float64)
    values = values.reshape(len(raws), 3 * config.per_modality)
    return FeatureTable(tuple(s.sample_id for s in d), tuple(s.patient_id for s in d),
                        np.array([s.label for s in d], dtype=np.int64), values,
                        tuple(feature_names(config)), (), config)


def fit_config(raws: Sequence[RawFeatures], config: FeatureConfig) -> FeatureConfig:
    """Freeze VAR bin edges from the given (training) rows into the config."""
    samples = [v for r in raws for v in r.var_values]
    return config.with_var_edges(fit_var_edges(samples, config.lbp.var_bins))


def build_table(d: Dataset, prep: str = "none", config: FeatureConfig | None = None,
                threads: int | None = None, impute: bool = True) -> FeatureTable:
    """Feature table for a dataset.

    If ``config`` carries no VAR edges, they are fitted on ``d`` itself, which
    is then treated as the training design. Columns with any missing value are
    imputed with 0 unless ``impute`` is false.
    """
    if len(d) == 0:
        raise DataError("cannot build a feature table from an empty dataset")
    config = config or FeatureConfig()
    raws = raw_features(d, prep, config, threads)
    if config.lbp.var_edges is None:
        config = fit_config(raws, config)
    table = table_from_raw(d, raws, config)
    return table.impute() if impute else table
