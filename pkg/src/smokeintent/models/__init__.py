"""From-scratch classifier families behind one fit/predict interface."""

from .base import (
    KIND_FOREST,
    KIND_GBM,
    KIND_LINEAR,
    KIND_LOGISTIC,
    KIND_NB,
    KIND_TREE,
    MODEL_KINDS,
    ModelMeta,
    PredictionError,
    PredictionResult,
    TrainedModel,
    fit_classifier,
    predict,
    predict_labels,
    probability_yes,
)
from .boosting import GbmConfig, GbmModel, GbmStage, fit_gbm, predict_proba_gbm
from .forest import ForestConfig, ForestModel, fit_random_forest, predict_forest, vote_fraction, vote_mode
from .gd import (
    DivergenceError,
    GdConfig,
    GdResult,
    fit_linear_regression,
    fit_logistic,
    log_loss_gradient,
    log_loss_value,
    predict_linear,
    predict_proba_logistic,
    rss_gradient,
    rss_value,
    sigmoid,
    softmax_proba,
)
from .naive_bayes import GaussianNbModel, fit_gaussian_nb, predict_nb, predict_proba_nb
from .tree import (
    Leaf,
    Split,
    TreeConfig,
    TreeNode,
    expected_information,
    fit_decision_tree,
    fit_regression_tree,
    information,
    predict_tree,
    split_gain,
    tree_depth,
)

__all__ = [name for name in dir() if not name.startswith("_")]
