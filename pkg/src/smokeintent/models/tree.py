"""ID3 decision trees over integer-coded categorical features.

Splits are multiway, one child per observed answer code, and consume the
feature for the rest of the path. Each internal node carries a fallback
leaf so codes never seen in training still route somewhere. The same node
structure doubles as a regression tree (variance-reduction splits) for the
boosting base learner.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Union

import numpy as np


@dataclass
class Leaf:
    # class label for classification trees, real value for regression trees
    value: int | float


@dataclass
class Split:
    feature: int
    children: dict[int, "TreeNode"] = field(default_factory=dict)
    fallback: "TreeNode" = None  # used for answer codes unseen at this node

    def child_for(self, code: int) -> "TreeNode":
        return self.children.get(code, self.fallback)


TreeNode = Union[Leaf, Split]


@dataclass(frozen=True)
class TreeConfig:
    max_depth: int | None = None
    min_samples: int = 2

    def __post_init__(self):
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.min_samples < 1:
            raise ValueError("min_samples must be >= 1")


def information(p: int, n: int) -> float:
    """Expected information (binary entropy, in bits) of p positives and n
    negatives; the 0*log(0) terms are taken as 0."""
    total = p + n
    if total < 1:
        raise ValueError("information needs p + n >= 1")
    out = 0.0
    for count in (p, n):
        if count > 0:
            frac = count / total
            out -= frac * np.log2(frac)
    return float(out)


def expected_information(partition: Iterable[tuple[int, int]]) -> float:
    """Weighted average of per-cell information over a disjoint partition."""
    cells = [(p, n) for p, n in partition]
    total = sum(p + n for p, n in cells)
    if total < 1:
        raise ValueError("partition is empty")
    return float(sum((p + n) / total * information(p, n) for p, n in cells))


def split_gain(codes: np.ndarray, y: np.ndarray) -> float:
    """Information gain of a multiway split on the observed codes."""
    y = np.asarray(y)
    p = int(np.sum(y == 1))
    n = int(len(y) - p)
    _, inverse = np.unique(np.asarray(codes), return_inverse=True)
    pos = np.bincount(inverse, weights=(y == 1).astype(float))
    tot = np.bincount(inverse)
    return information(p, n) - expected_information(
        (int(pi), int(ti - pi)) for pi, ti in zip(pos, tot)
    )


def _majority(y: np.ndarray) -> int:
    pos = int(np.sum(y == 1))
    return 1 if pos > len(y) - pos else 0  # ties go to class 0


def fit_decision_tree(
    X, y, cfg: TreeConfig | None = None, features: Iterable[int] | None = None
) -> TreeNode:
    """Grow an ID3 tree: at each node split on the untried feature with the
    highest information gain (ties resolve to the lowest feature index).

    ``features`` restricts the candidate set, for forest feature
    subsampling. Growth stops on purity, exhausted features, max_depth, or
    nodes smaller than min_samples.
    """
    cfg = cfg or TreeConfig()
    X = np.asarray(X, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2:
        raise ValueError("X must be a 2-D matrix of integer codes")
    if X.shape[0] == 0:
        raise ValueError("cannot fit a tree on an empty training set")
    allowed = list(range(X.shape[1])) if features is None else sorted(features)

    def build(idx: np.ndarray, used: frozenset[int], depth: int) -> TreeNode:
        sub_y = y[idx]
        label = _majority(sub_y)
        pure = np.all(sub_y == sub_y[0])
        if pure or len(idx) < cfg.min_samples:
            return Leaf(int(sub_y[0]) if pure else label)
        if cfg.max_depth is not None and depth >= cfg.max_depth:
            return Leaf(label)

        best_feature, best_gain = None, -np.inf
        for f in allowed:
            if f in used:
                continue
            column = X[idx, f]
            if np.all(column == column[0]):
                continue  # single-valued: no real split
            g = split_gain(column, sub_y)
            if g > best_gain:
                best_feature, best_gain = f, g
        if best_feature is None:
            return Leaf(label)

        column = X[idx, best_feature]
        children = {
            int(code): build(idx[column == code], used | {best_feature}, depth + 1)
            for code in np.unique(column)
        }
        return Split(feature=best_feature, children=children, fallback=Leaf(label))

    return build(np.arange(X.shape[0]), frozenset(), 0)


def fit_regression_tree(
    X,
    target: np.ndarray,
    cfg: TreeConfig,
    leaf_value: Callable[[np.ndarray], float],
    features: Iterable[int] | None = None,
) -> TreeNode:
    """Regression tree on integer codes: multiway splits chosen by variance
    reduction of ``target``; leaf values come from ``leaf_value`` applied to
    the row indices reaching the leaf (so boosting can take Newton steps)."""
    X = np.asarray(X, dtype=np.int64)
    target = np.asarray(target, dtype=float)
    if X.shape[0] == 0:
        raise ValueError("cannot fit a tree on an empty training set")
    allowed = list(range(X.shape[1])) if features is None else sorted(features)

    def build(idx: np.ndarray, used: frozenset[int], depth: int) -> TreeNode:
        t = target[idx]
        if (
            len(idx) < cfg.min_samples
            or (cfg.max_depth is not None and depth >= cfg.max_depth)
            or np.all(t == t[0])
        ):
            return Leaf(leaf_value(idx))

        parent_var = float(np.var(t))
        best_feature, best_reduction = None, 0.0
        for f in allowed:
            if f in used:
                continue
            column = X[idx, f]
            if np.all(column == column[0]):
                continue
            _, inverse = np.unique(column, return_inverse=True)
            counts = np.bincount(inverse)
            sums = np.bincount(inverse, weights=t)
            sq_sums = np.bincount(inverse, weights=t * t)
            child_var = sq_sums / counts - (sums / counts) ** 2
            reduction = parent_var - float(np.sum(counts * child_var) / len(idx))
            if reduction > best_reduction:
                best_feature, best_reduction = f, reduction
        if best_feature is None:
            return Leaf(leaf_value(idx))

        column = X[idx, best_feature]
        children = {
            int(code): build(idx[column == code], used | {best_feature}, depth + 1)
            for code in np.unique(column)
        }
        return Split(feature=best_feature, children=children, fallback=Leaf(leaf_value(idx)))

    return build(np.arange(X.shape[0]), frozenset(), 0)


def predict_tree(node: TreeNode, x) -> int | float:
    """Route one code vector to a leaf; unseen codes take the fallback."""
    while isinstance(node, Split):
        node = node.child_for(int(x[node.feature]))
    return node.value


def tree_depth(node: TreeNode) -> int:
    if isinstance(node, Leaf):
        return 0
    return 1 + max(tree_depth(child) for child in node.children.values())
