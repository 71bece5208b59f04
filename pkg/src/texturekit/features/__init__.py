from .extract import (FEATURE_NAMES, FIRST_ORDER, FeatureConfig, FeatureVector, RawFeatures,
                      extract_features, extract_raw, feature_names, first_order)
from .glcm import DIRECTIONS, compute_glcm, glcm_set, haralick_features, haralick_single, quantize
from .lbp import LBPConfig, fit_var_edges, lbp_features, local_variance, riu2_histogram
from .table import FeatureTable, build_table, fit_config, raw_features, table_from_raw

__all__ = [
    "FEATURE_NAMES", "FIRST_ORDER", "FeatureConfig", "FeatureVector", "RawFeatures",
    "extract_features", "extract_raw", "feature_names", "first_order",
    "DIRECTIONS", "compute_glcm", "glcm_set", "haralick_features", "haralick_single", "quantize",
    "LBPConfig", "fit_var_edges", "lbp_features", "local_variance", "riu2_histogram",
    "FeatureTable", "build_table", "fit_config", "raw_features", "table_from_raw",
]
