"""Feature correlation and Shapley-value attribution."""
from .correlation import CorrelationMatrix, pearson_matrix
from .shap import (FeatureSummary, ShapReport, explain_table, shap_bruteforce, shap_summary, top_share,
                   tree_conditional_expectation, treeshap, treeshap_matrix, write_summary_csv)
from .svg import correlation_heatmap, metric_scatter, shap_strips

__all__ = [
    "CorrelationMatrix", "FeatureSummary", "ShapReport", "correlation_heatmap", "explain_table",
    "metric_scatter", "pearson_matrix", "shap_strips",
    "shap_bruteforce", "shap_summary", "top_share", "tree_conditional_expectation", "treeshap",
    "treeshap_matrix", "write_summary_csv",
]
