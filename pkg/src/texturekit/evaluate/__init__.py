"""Metrics, patient-grouped CV, grid search and configuration clustering."""
from .cluster import ConfigCluster, cluster_configs, kmeans
from .cv import (CSV_HEADER, METRICS, FeatureCache, FoldPlan, FoldResult, GridCell, MetricSummary,
                 cross_validate, cross_validate_table, grid_search, make_folds, make_grid, rank_summaries,
                 read_metrics_csv, rf_grid, write_metrics_csv)
from .metrics import confusion, metrics_from_confusion, roc_auc, threshold_metrics

__all__ = [
    "CSV_HEADER", "METRICS", "ConfigCluster", "FeatureCache", "FoldPlan", "FoldResult", "GridCell",
    "MetricSummary", "cluster_configs", "confusion", "cross_validate", "cross_validate_table",
    "grid_search", "kmeans", "make_folds", "make_grid", "metrics_from_confusion", "rank_summaries",
    "read_metrics_csv", "rf_grid", "roc_auc", "threshold_metrics", "write_metrics_csv",
]
