"""Pearson correlation between feature columns."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DataError
from ..features import FeatureTable


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    feature_names: tuple[str, ...]
    r: np.ndarray              # NaN rows/columns where invalid
    valid_mask: np.ndarray

    @property
    def valid_names(self) -> list[str]:
        return [n for n, v in zip(self.feature_names, self.valid_mask) if v]

    @property
    def invalid_names(self) -> list[str]:
        return [n for n, v in zip(self.feature_names, self.valid_mask) if not v]

    def write_csv(self, path) -> tuple[Path, Path]:
        """Square matrix over valid columns, plus a sidecar listing the omitted ones."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        idx = np.flatnonzero(self.valid_mask)
        names = [self.feature_names[i] for i in idx]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["feature", *names])
            for i, name in zip(idx, names):
                w.writerow([name, *(repr(float(self.r[i, j])) for j in idx)])
        side = path.with_suffix(".invalid.txt")
        side.write_text("".join(n + "\n" for n in self.invalid_names))
        return path, side


def pearson_matrix(table: FeatureTable) -> CorrelationMatrix:
    """Pairwise Pearson r; zero-variance columns and columns with missing values are invalid."""
    if len(table) < 2:
        raise DataError("correlation needs at least two rows")
    V = table.values
    valid = ~(~np.isfinite(V)).any(axis=0)
    Z = np.where(valid[None, :], V, 0.0)
    Z = Z - Z.mean(axis=0)
    ss = np.sqrt((Z * Z).sum(axis=0))
    valid &= ss > 0
    U = np.where(valid[None, :], Z / np.where(ss > 0, ss, 1.0), 0.0)
    r = np.clip(U.T @ U, -1.0, 1.0)
    r = 0.5 * (r + r.T)
    np.fill_diagonal(r, 1.0)
    r[~valid, :] = np.nan
    r[:, ~valid] = np.nan
    return CorrelationMatrix(tuple(table.feature_names), r, valid)
