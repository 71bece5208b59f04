"""Per-sample feature vectors: 4 first-order + 14 Haralick + 35 LBP per modality."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError, UnusablePatchError
from ..patchio import MODALITIES, SampleTriple, preprocess
from .glcm import N_HARALICK, glcm_set, haralick_features
from .lbp import LBPConfig, lbp_riu2_part, var_histogram

FIRST_ORDER = ("mean", "std", "skewness", "kurtosis")


@dataclass(frozen=True)
class FeatureConfig:
    glcm_levels: int = 32
    glcm_distance: int = 1
    lbp: LBPConfig = field(default_factory=LBPConfig)

    def with_var_edges(self, edges) -> "FeatureConfig":
        return FeatureConfig(self.glcm_levels, self.glcm_distance, self.lbp.with_edges(edges))

    @property
    def per_modality(self) -> int:
        return len(FIRST_ORDER) + N_HARALICK + self.lbp.n_features


def modality_feature_tags(config: FeatureConfig = FeatureConfig()) -> list[str]:
    tags = list(FIRST_ORDER)
    tags += [f"haralick{i:02d}" for i in range(1, N_HARALICK + 1)]
    tags += [f"lbp-{i:02d}" for i in range(1, config.lbp.n_features + 1)]
    return tags


def feature_names(config: FeatureConfig = FeatureConfig()) -> list[str]:
    tags = modality_feature_tags(config)
    return [f"{m.tag}_{t}" for m in MODALITIES for t in tags]


FEATURE_NAMES = tuple(feature_names())


def first_order(grid) -> tuple[float, float, float, float]:
    """Population mean, std, skewness and excess kurtosis; shape terms are 0 if std is 0."""
    x = np.asarray(grid, dtype=np.float64).ravel()
    mu = x.mean()
    d = x - mu
    m2 = (d * d).mean()
    sd = np.sqrt(m2)
    if sd == 0:
        return float(mu), 0.0, 0.0, 0.0
    m3 = (d ** 3).mean()
    m4 = (d ** 4).mean()
    return float(mu), float(sd), float(m3 / sd ** 3), float(m4 / m2 ** 2 - 3.0)


@dataclass(frozen=True)
class RawFeatures:
    """Everything but the VAR histogram, which needs training-set bin edges."""

    fixed: np.ndarray           # (3, 4 + 14 + riu2 bins)
    var_values: tuple           # per modality, raw VAR samples

    def assemble(self, config: FeatureConfig) -> np.ndarray:
        edges = config.lbp.edges
        rows = [np.concatenate([f, var_histogram(v, edges)]) for f, v in zip(self.fixed, self.var_values)]
        return np.concatenate(rows)


def modality_raw(grid, config: FeatureConfig) -> tuple[np.ndarray, np.ndarray]:
    fo = first_order(grid)
    har = haralick_features(glcm_set(grid, config.glcm_levels, config.glcm_distance))
    riu2, var = lbp_riu2_part(grid, config.lbp)
    return np.concatenate([fo, har, riu2]), var


def extract_raw(s: SampleTriple, prep: str = "none", config: FeatureConfig = FeatureConfig()) -> RawFeatures:
    fixed, var = [], []
    for p in s.patches:
        try:
            f, v = modality_raw(preprocess(p.pixels, prep), config)
        except UnusablePatchError as exc:
            raise UnusablePatchError(f"sample {s.sample_id} ({p.modality.name}): {exc}") from exc
        fixed.append(f)
        var.append(v)
    return RawFeatures(np.array(fixed), tuple(var))


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    missing_mask: np.ndarray

    @classmethod
    def from_values(cls, values: np.ndarray) -> "FeatureVector":
        values = np.asarray(values, dtype=np.float64)
        return cls(values, ~np.isfinite(values))

    def imputed(self) -> np.ndarray:
        return np.where(self.missing_mask, 0.0, self.values)


def extract_features(s: SampleTriple, prep: str = "none",
                     config: FeatureConfig = FeatureConfig()) -> FeatureVector:
    vec = extract_raw(s, prep, config).assemble(config)
    if vec.size != 3 * config.per_modality:
        raise DataError("feature vector length mismatch")
    return FeatureVector.from_values(vec)
