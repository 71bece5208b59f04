"""From-scratch tree ensembles and SVMs."""
import numpy as np

from ..errors import ConfigError
from .forest import ForestModel, train_forest
from .io import load_model, save_model
from .svm import SVMModel, SVMParams, train_svm
from .tree import RF_GRID, RFParams, Tree, train_tree


def predict_proba(model, X) -> np.ndarray:
    """Positive-class probability for each row (a single vector gives a length-1 array)."""
    return model.predict_proba(X)


def fit_model(params, X, y, seed: int = 0, feature_names=None, threads=None):
    """Train whichever learner ``params`` describes.

    Anything with a ``fit(X, y, seed)`` method returning an object with
    ``predict_proba`` is accepted too, which keeps evaluation code testable
    with oracle models.
    """
    if isinstance(params, RFParams):
        return train_forest(X, y, params, seed=seed, feature_names=feature_names, threads=threads)
    if isinstance(params, SVMParams):
        return train_svm(X, y, params, feature_names=feature_names)
    if hasattr(params, "fit"):
        return params.fit(X, y, seed)
    raise ConfigError(f"unsupported model parameters {type(params).__name__}")


def config_id(params) -> str:
    return getattr(params, "config_id", type(params).__name__)


__all__ = [
    "ForestModel", "RFParams", "RF_GRID", "SVMModel", "SVMParams", "Tree", "config_id", "fit_model",
    "load_model", "predict_proba", "save_model", "train_forest", "train_svm", "train_tree",
]
