"""One fit/predict surface over the six classifier families.

Every trained model is a TrainedModel: a kind tag, the learned
parameters, and training metadata. ``predict`` returns the probability
of the positive class plus the thresholded label; families without
native probabilities report a documented pseudo-probability (vote
fraction for forests, the 0/1 leaf label for trees, and the clipped
regression response for the linear threshold model).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .boosting import GbmConfig, GbmModel, fit_gbm, predict_proba_gbm
from .forest import ForestConfig, ForestModel, fit_random_forest, vote_fraction
from .gd import GdConfig, fit_linear_regression, fit_logistic, sigmoid
from .naive_bayes import GaussianNbModel, fit_gaussian_nb, predict_proba_nb
from .tree import TreeConfig, TreeNode, fit_decision_tree, predict_tree

KIND_LINEAR = "linear-threshold"
KIND_LOGISTIC = "logistic"
KIND_NB = "gaussian-nb"
KIND_TREE = "decision-tree"
KIND_FOREST = "random-forest"
KIND_GBM = "gradient-boosting"
MODEL_KINDS = (KIND_LINEAR, KIND_LOGISTIC, KIND_NB, KIND_TREE, KIND_FOREST, KIND_GBM)


class PredictionError(ValueError):
    """Input vector violates the model's arity or value domains."""


@dataclass
class ModelMeta:
    feature_names: list[str]
    hyperparameters: dict = field(default_factory=dict)
    seed: int | None = None
    catalog_version: str = ""
    # allowed non-zero codes per feature column; None disables domain checks
    feature_domains: list[tuple[int, ...]] | None = None
    # left empty by default so saved files stay byte-reproducible
    created: str = ""


@dataclass
class TrainedModel:
    kind: str
    params: object  # weights | GaussianNbModel | TreeNode | ForestModel | GbmModel
    meta: ModelMeta

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")

    @property
    def n_features(self) -> int:
        return len(self.meta.feature_names)


@dataclass(frozen=True)
class PredictionResult:
    probability_yes: float
    label: int


def _validate_input(model: TrainedModel, x: np.ndarray):
    if x.shape[0] != model.n_features:
        raise PredictionError(f"expected {model.n_features} features, got {x.shape[0]}")
    domains = model.meta.feature_domains
    if domains is None:
        return
    for i, (value, allowed) in enumerate(zip(x, domains)):
        if value != 0 and int(value) not in allowed:
            name = model.meta.feature_names[i]
            raise PredictionError(f"code {int(value)} out of domain for {name}")


def probability_yes(model: TrainedModel, x) -> float:
    """Probability (or pseudo-probability) of the positive class."""
    x = np.asarray(x).ravel()
    _validate_input(model, x)
    if model.kind == KIND_LINEAR:
        response = float(model.params @ np.concatenate([[1.0], x.astype(float)]))
        return min(max(response, 0.0), 1.0)
    if model.kind == KIND_LOGISTIC:
        return float(sigmoid(float(model.params @ np.concatenate([[1.0], x.astype(float)]))))
    if model.kind == KIND_NB:
        nb: GaussianNbModel = model.params
        post = predict_proba_nb(nb, x)
        return float(post[nb.classes == 1].sum())
    if model.kind == KIND_TREE:
        return float(predict_tree(model.params, x))
    if model.kind == KIND_FOREST:
        return vote_fraction(model.params, x)
    if model.kind == KIND_GBM:
        return predict_proba_gbm(model.params, x)
    raise AssertionError(model.kind)


def predict(model: TrainedModel, x) -> PredictionResult:
    """Probability plus thresholded label; an exact 0.5 resolves to 0."""
    p = probability_yes(model, x)
    return PredictionResult(probability_yes=p, label=1 if p > 0.5 else 0)


def predict_labels(model: TrainedModel, X) -> np.ndarray:
    X = np.asarray(X)
    return np.array([predict(model, row).label for row in X], dtype=np.int64)


def fit_classifier(
    kind: str,
    X,
    y,
    config=None,
    *,
    feature_names: list[str] | None = None,
    seed: int | None = None,
    catalog_version: str = "",
    feature_domains: list[tuple[int, ...]] | None = None,
    created: str = "",
) -> TrainedModel:
    """Train one model family behind the shared interface.

    ``config`` is the family's config dataclass (GdConfig, TreeConfig,
    ForestConfig, GbmConfig) or None for defaults; for gaussian-nb it is
    the var_smoothing float.
    """
    X = np.asarray(X)
    if feature_names is None:
        feature_names = [f"x{i}" for i in range(X.shape[1])]
    if kind in (KIND_LINEAR, KIND_LOGISTIC):
        cfg = config or GdConfig()
        result = (fit_linear_regression if kind == KIND_LINEAR else fit_logistic)(X, y, cfg)
        params = result.weights
        hyper = asdict(cfg)
        hyper.update(iterations=result.iterations, converged=result.converged,
                     separation_flagged=result.separation_flagged)
    elif kind == KIND_NB:
        var_smoothing = 1e-9 if config is None else float(config)
        params = fit_gaussian_nb(X, y, var_smoothing)
        hyper = {"var_smoothing": var_smoothing}
    elif kind == KIND_TREE:
        cfg = config or TreeConfig()
        params = fit_decision_tree(X, y, cfg)
        hyper = asdict(cfg)
    elif kind == KIND_FOREST:
        cfg = config or ForestConfig(seed=seed or 0)
        params = fit_random_forest(X, y, cfg)
        hyper = asdict(cfg)
    elif kind == KIND_GBM:
        cfg = config or GbmConfig(seed=seed or 0)
        params = fit_gbm(X, y, cfg)
        hyper = asdict(cfg)
    else:
        raise ValueError(f"unknown model kind {kind!r} (expected one of {MODEL_KINDS})")

    meta = ModelMeta(
        feature_names=list(feature_names),
        hyperparameters=hyper,
        seed=seed,
        catalog_version=catalog_version,
        feature_domains=feature_domains,
        created=created,
    )
    return TrainedModel(kind=kind, params=params, meta=meta)
