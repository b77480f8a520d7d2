"""Random forest: bagged ID3 trees with per-tree feature subsampling and
majority-vote prediction."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tree import TreeConfig, TreeNode, fit_decision_tree, predict_tree


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    m: int | None = None  # features per tree, default ceil(sqrt(d))
    seed: int = 0
    bootstrap: bool = True
    max_depth: int | None = None
    min_samples: int = 2

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")


@dataclass
class ForestModel:
    trees: list[TreeNode]
    tree_seeds: list[int]
    feature_subsets: list[tuple[int, ...]]
    m: int
    bootstrap: bool


def fit_random_forest(X, y, cfg: ForestConfig | None = None) -> ForestModel:
    """Train n_trees ID3 trees, each on a bootstrap resample (n draws with
    replacement) restricted to m features drawn without replacement.

    Per-tree seeds are pre-assigned from the forest seed, so the result is
    deterministic and independent of training order.
    """
    cfg = cfg or ForestConfig()
    X = np.asarray(X, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    n, d = X.shape
    m = cfg.m if cfg.m is not None else math.ceil(math.sqrt(d))
    if m > d:
        raise ValueError(f"m={m} exceeds the {d} available features")
    if m < 1:
        raise ValueError("m must be >= 1")

    seeds = [int(s) for s in np.random.default_rng(cfg.seed).integers(0, 2**62, size=cfg.n_trees)]
    tree_cfg = TreeConfig(max_depth=cfg.max_depth, min_samples=cfg.min_samples)
    trees: list[TreeNode] = []
    subsets: list[tuple[int, ...]] = []
    for seed in seeds:
        rng = np.random.default_rng(seed)
        rows = rng.integers(0, n, size=n) if cfg.bootstrap else np.arange(n)
        feats = tuple(int(f) for f in np.sort(rng.choice(d, size=m, replace=False)))
        trees.append(fit_decision_tree(X[rows], y[rows], tree_cfg, features=feats))
        subsets.append(feats)
    return ForestModel(trees=trees, tree_seeds=seeds, feature_subsets=subsets, m=m, bootstrap=cfg.bootstrap)


def vote_mode(votes) -> int:
    """Most frequent label; ties resolve to the lowest label."""
    values, counts = np.unique(np.asarray(votes), return_counts=True)
    return int(values[int(np.argmax(counts))])


def tree_votes(model: ForestModel, x) -> list[int]:
    return [int(predict_tree(t, x)) for t in model.trees]


def predict_forest(model: ForestModel, x) -> int:
    return vote_mode(tree_votes(model, x))


def vote_fraction(model: ForestModel, x) -> float:
    """Fraction of trees voting class 1; the forest's pseudo-probability."""
    votes = tree_votes(model, x)
    return sum(v == 1 for v in votes) / len(votes)
