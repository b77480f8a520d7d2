"""Gradient boosting for binary labels: log-loss gradients fitted by
shallow regression trees, Newton leaf steps, shrinkage per stage.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gd import sigmoid
from .tree import TreeConfig, TreeNode, fit_regression_tree, predict_tree

NEWTON_DENOM_FLOOR = 1e-12


@dataclass(frozen=True)
class GbmConfig:
    n_stages: int = 100
    shrinkage: float = 0.1
    max_depth: int = 3
    min_samples: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.n_stages < 1:
            raise ValueError("n_stages must be >= 1")
        if not 0.0 < self.shrinkage <= 1.0:
            raise ValueError("shrinkage must be in (0, 1]")


@dataclass
class GbmStage:
    tree: TreeNode
    shrinkage: float


@dataclass
class GbmModel:
    initial_score: float  # log-odds of the positive class on the training data
    stages: list[GbmStage]
    train_log_loss: list[float] = field(default_factory=list)  # mean log-loss after each stage


def _mean_log_loss(scores: np.ndarray, y: np.ndarray) -> float:
    # softplus form: finite even for saturated scores
    return float(np.mean(np.logaddexp(0.0, scores) - y * scores))


def fit_gbm(X, y, cfg: GbmConfig | None = None) -> GbmModel:
    """Stagewise boosting on the binary log-loss.

    Each stage fits a regression tree to the residuals y - sigmoid(F),
    takes a Newton step per leaf (sum of residuals over sum of p(1-p),
    denominator floored), and adds the shrunken tree to the score F.
    """
    cfg = cfg or GbmConfig()
    X = np.asarray(X, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    classes = set(np.unique(y))
    if classes - {0, 1}:
        raise ValueError(f"boosting targets must be 0/1, found {sorted(classes)}")
    if len(classes) < 2:
        raise ValueError("boosting needs both classes present in y")

    p_bar = float(y.mean())
    f0 = float(np.log(p_bar / (1.0 - p_bar)))
    scores = np.full(X.shape[0], f0)
    yf = y.astype(float)
    tree_cfg = TreeConfig(max_depth=cfg.max_depth, min_samples=cfg.min_samples)

    stages: list[GbmStage] = []
    losses: list[float] = []
    for _ in range(cfg.n_stages):
        p = sigmoid(scores)
        residuals = yf - p
        curvature = p * (1.0 - p)

        def newton_step(idx: np.ndarray) -> float:
            return float(residuals[idx].sum() / max(curvature[idx].sum(), NEWTON_DENOM_FLOOR))

        tree = fit_regression_tree(X, residuals, tree_cfg, leaf_value=newton_step)
        stages.append(GbmStage(tree=tree, shrinkage=cfg.shrinkage))
        scores = scores + cfg.shrinkage * np.array([predict_tree(tree, row) for row in X])
        losses.append(_mean_log_loss(scores, yf))
    return GbmModel(initial_score=f0, stages=stages, train_log_loss=losses)


def decision_score_gbm(model: GbmModel, x) -> float:
    score = model.initial_score
    for stage in model.stages:
        score += stage.shrinkage * predict_tree(stage.tree, x)
    return score


def predict_proba_gbm(model: GbmModel, x) -> float:
    """Probability of class 1 for one code vector."""
    return float(sigmoid(decision_score_gbm(model, x)))
