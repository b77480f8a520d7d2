"""Gaussian Naive Bayes: class priors from frequencies, per-class
per-feature normal densities, posteriors normalized in log space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass
class GaussianNbModel:
    classes: np.ndarray  # (K,) sorted class labels
    priors: np.ndarray  # (K,) class frequencies, sum to 1
    means: np.ndarray  # (K, d)
    variances: np.ndarray  # (K, d), floored at var_floor
    var_floor: float


def fit_gaussian_nb(X, y, var_smoothing: float = 1e-9) -> GaussianNbModel:
    """Estimate priors, means, and variances per (class, feature).

    Variances are floored at var_smoothing * (largest feature variance),
    never below var_smoothing itself, so constant features stay usable.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    y = np.asarray(y)
    if X.shape[0] != y.shape[0] or X.shape[0] == 0:
        raise ValueError("X and y must be non-empty with matching row counts")

    classes, counts = np.unique(y, return_counts=True)
    k, d = len(classes), X.shape[1]
    means = np.zeros((k, d))
    variances = np.zeros((k, d))
    for i, c in enumerate(classes):
        rows = X[y == c]
        means[i] = rows.mean(axis=0)
        variances[i] = rows.var(axis=0)

    overall_var = float(X.var(axis=0).max()) if X.size else 0.0
    floor = max(var_smoothing * overall_var, var_smoothing)
    return GaussianNbModel(
        classes=classes,
        priors=counts / counts.sum(),
        means=means,
        variances=np.maximum(variances, floor),
        var_floor=floor,
    )


def log_joint(model: GaussianNbModel, x) -> np.ndarray:
    """log P(Y=c) + sum_i log N(x_i; mu_ic, var_ic) for each class."""
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != model.means.shape[1]:
        raise ValueError(f"expected {model.means.shape[1]} features, got {x.shape[0]}")
    ll = -0.5 * (_LOG_2PI + np.log(model.variances) + (x - model.means) ** 2 / model.variances)
    return np.log(model.priors) + ll.sum(axis=1)


def predict_proba_nb(model: GaussianNbModel, x) -> np.ndarray:
    """Posterior probabilities, normalized with log-sum-exp."""
    lj = log_joint(model, x)
    m = lj.max()
    e = np.exp(lj - m)
    return e / e.sum()


def predict_nb(model: GaussianNbModel, x) -> int:
    """Most probable class; ties resolve to the lowest label."""
    post = predict_proba_nb(model, x)
    return int(model.classes[int(np.argmax(post))])
