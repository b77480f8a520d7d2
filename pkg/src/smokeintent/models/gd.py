"""Batch gradient descent: linear regression on squared error, logistic
regression on log-loss, and the softmax generalization.

Feature vectors are implicitly augmented with a leading constant 1, so a
weight vector has length d+1 with the intercept at index 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DivergenceError(RuntimeError):
    """Training loss left the finite range."""

    def __init__(self, iteration: int, loss: float):
        self.iteration = iteration
        self.loss = loss
        super().__init__(f"training diverged at iteration {iteration} (loss={loss!r})")


@dataclass(frozen=True)
class GdConfig:
    learning_rate: float = 0.01
    convergence_threshold: float = 1e-6  # on the weight-change norm
    max_iters: int = 10_000
    weight_cap: float = 1e4  # perfect-separation guard for logistic training
    l2: float = 0.0  # optional ridge penalty on non-intercept weights

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.convergence_threshold <= 0:
            raise ValueError("convergence_threshold must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class GdResult:
    weights: np.ndarray  # (d+1,), intercept first
    iterations: int
    final_loss: float
    converged: bool
    separation_flagged: bool = False


def augment(X: np.ndarray) -> np.ndarray:
    """Prepend the constant-1 intercept column."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    return np.hstack([np.ones((X.shape[0], 1)), X])


def sigmoid(z):
    """Numerically stable logistic function."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out if out.ndim else float(out)


def rss_value(w: np.ndarray, X: np.ndarray, y: np.ndarray) -> float:
    """Residual sum of squares of the linear model at w."""
    r = np.asarray(y, dtype=float) - augment(X) @ w
    return float(r @ r)


def rss_gradient(w: np.ndarray, X: np.ndarray, y: np.ndarray) -> np.ndarray:
    Xa = augment(X)
    r = np.asarray(y, dtype=float) - Xa @ w
    return -2.0 * (Xa.T @ r)


def log_loss_value(w: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float = 0.0) -> float:
    """Summed binary cross-entropy at w (softplus form, overflow-safe)."""
    z = augment(X) @ w
    y = np.asarray(y, dtype=float)
    loss = float(np.sum(np.logaddexp(0.0, z) - y * z))
    if l2:
        loss += 0.5 * l2 * float(w[1:] @ w[1:])
    return loss


def log_loss_gradient(w: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float = 0.0) -> np.ndarray:
    Xa = augment(X)
    p = sigmoid(Xa @ w)
    g = Xa.T @ (p - np.asarray(y, dtype=float))
    if l2:
        g = g + l2 * np.concatenate([[0.0], w[1:]])
    return g


def _descend(Xa: np.ndarray, y: np.ndarray, cfg: GdConfig, loss_and_grad, watch_separation: bool) -> GdResult:
    """Shared descent loop. Deterministic: weights start at zero, steps are
    the loss gradient scaled by learning_rate / n, and iteration stops on
    the weight-change norm, the iteration cap, or the separation guard."""
    n = Xa.shape[0]
    if n < 1:
        raise ValueError("need at least one training row")
    w = np.zeros(Xa.shape[1])
    iterations = 0
    converged = False
    separated = False
    with np.errstate(over="ignore", invalid="ignore"):  # divergence is detected, not warned
        loss, grad = loss_and_grad(w)
        for i in range(1, cfg.max_iters + 1):
            w_new = w - (cfg.learning_rate / n) * grad
            iterations = i
            loss, grad = loss_and_grad(w_new)
            if not np.isfinite(loss) or not np.all(np.isfinite(w_new)):
                raise DivergenceError(i, loss)
            delta = float(np.linalg.norm(w_new - w))
            w = w_new
            if watch_separation and float(np.linalg.norm(w)) > cfg.weight_cap:
                separated = True  # weights keep growing without bound; stop, weights stay usable
                break
            if delta < cfg.convergence_threshold:
                converged = True
                break
    return GdResult(
        weights=w,
        iterations=iterations,
        final_loss=loss,
        converged=converged,
        separation_flagged=separated,
    )


def fit_linear_regression(X, y, cfg: GdConfig | None = None) -> GdResult:
    """Gradient descent on the residual sum of squares."""
    cfg = cfg or GdConfig()
    Xa = augment(X)
    y = np.asarray(y, dtype=float)

    def loss_and_grad(w):
        r = y - Xa @ w
        return float(r @ r), -2.0 * (Xa.T @ r)

    return _descend(Xa, y, cfg, loss_and_grad, watch_separation=False)


def fit_logistic(X, y, cfg: GdConfig | None = None) -> GdResult:
    """Gradient descent on the binary log-loss."""
    cfg = cfg or GdConfig()
    y = np.asarray(y)
    bad = set(np.unique(y)) - {0, 1}
    if bad:
        raise ValueError(f"logistic targets must be 0/1, found {sorted(bad)}")
    Xa = augment(X)
    yf = y.astype(float)

    def loss_and_grad(w):
        z = Xa @ w
        loss = float(np.sum(np.logaddexp(0.0, z) - yf * z))
        grad = Xa.T @ (sigmoid(z) - yf)
        if cfg.l2:
            loss += 0.5 * cfg.l2 * float(w[1:] @ w[1:])
            grad = grad + cfg.l2 * np.concatenate([[0.0], w[1:]])
        return loss, grad

    return _descend(Xa, yf, cfg, loss_and_grad, watch_separation=True)


def predict_linear(w: np.ndarray, X) -> np.ndarray:
    return augment(X) @ w


def predict_proba_logistic(w: np.ndarray, X) -> np.ndarray:
    return sigmoid(augment(X) @ w)


def softmax_proba(W, x) -> np.ndarray:
    """Class probabilities from K weight vectors (overflow-safe).

    Uses max-subtraction, so extreme logits normalize without overflow.
    """
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] < 2:
        raise ValueError("softmax needs K >= 2 weight vectors")
    xa = np.concatenate([[1.0], np.asarray(x, dtype=float).ravel()])
    logits = W @ xa
    logits -= logits.max()
    e = np.exp(logits)
    return e / e.sum()
