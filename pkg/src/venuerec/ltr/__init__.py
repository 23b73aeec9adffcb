"""Learning-to-rank: linear coordinate ascent and boosted trees."""

import numpy as np

from ..errors import VenuerecError
from ..features import feature_matrix
from .coordinate_ascent import CAConfig, LinearModel, train_coordinate_ascent
from .data import TopicBlocks, rows_by_topic, split_train_validation
from .mart import MARTConfig, Tree, TreeEnsemble, fit_tree, train_mart
from .mart import _tree_outputs
from .serialize import load_model, load_model_info, save_model

__all__ = [
    "CAConfig",
    "LinearModel",
    "MARTConfig",
    "TopicBlocks",
    "Tree",
    "TreeEnsemble",
    "fit_tree",
    "load_model",
    "load_model_info",
    "predict_matrix",
    "predict_rows",
    "rows_by_topic",
    "save_model",
    "split_train_validation",
    "train_coordinate_ascent",
    "train_mart",
]


def predict_matrix(model, X):
    """Score every row of a feature matrix under either model kind."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise VenuerecError("expected a 2-d feature matrix")
    if isinstance(model, LinearModel):
        w = np.asarray(model.weights)
        if X.shape[1] != w.shape[0]:
            raise VenuerecError("matrix has %d features, model has %d"
                                % (X.shape[1], w.shape[0]))
        return X @ w
    if isinstance(model, TreeEnsemble):
        out = np.zeros(X.shape[0])
        for tree in model.trees:
            out += model.shrinkage * _tree_outputs(tree, X)
        return out
    raise VenuerecError("cannot score with %r" % type(model).__name__)


def predict_rows(model, rows):
    """Score feature rows in their given order."""
    if not rows:
        return np.zeros(0)
    X, _ = feature_matrix(rows)
    return predict_matrix(model, X)
