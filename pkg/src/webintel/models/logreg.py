"""Multinomial logistic regression trained by full-batch gradient descent.

Features are z-scored internally on the training data. The objective is
the mean cross-entropy plus an L2 penalty on the weights (bias excluded),
minimized with backtracking (Armijo) line search.
"""

from __future__ import annotations

import logging

import numpy as np

from ..errors import EmptyData, NonFiniteInput

logger = logging.getLogger(__name__)


def softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_grad(W, b, X, Y, l2):
    """Objective (mean NLL + l2/2 * ||W||^2 / n) and its gradients."""
    n = X.shape[0]
    P = softmax(X @ W + b)
    eps = 1e-300  # guard log(0) for fully confident wrong iterates
    nll = -np.sum(Y * np.log(P + eps)) / n
    loss = nll + 0.5 * l2 * float(np.sum(W * W)) / n
    G = (P - Y) / n
    grad_W = X.T @ G + l2 * W / n
    grad_b = G.sum(axis=0)
    return loss, grad_W, grad_b


class LogisticRegression:
    """Softmax classifier with ridge penalty.

    Args:
        l2: ridge strength on the weight matrix.
        max_iters: gradient descent iteration cap.
        tol: stop when the max absolute gradient entry drops below this.
    """

    def __init__(self, l2: float = 1.0, max_iters: int = 500, tol: float = 1e-6):
        self.l2 = l2
        self.max_iters = max_iters
        self.tol = tol
        self.converged_ = False

    def fit(self, X, y) -> "LogisticRegression":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        if X.size == 0 or len(y) == 0:
            raise EmptyData("logistic regression requires at least one row")
        if not np.all(np.isfinite(X)):
            raise NonFiniteInput("X contains NaN or infinity")

        self.classes_, y_idx = np.unique(y, return_inverse=True)
        n, d = X.shape
        c = len(self.classes_)

        self.mean_ = X.mean(axis=0)
        std = X.std(axis=0)
        self.std_ = np.where(std > 0, std, 1.0)
        Xs = (X - self.mean_) / self.std_

        Y = np.zeros((n, c))
        Y[np.arange(n), y_idx] = 1.0

        W = np.zeros((d, c))
        b = np.zeros(c)
        loss, gW, gb = loss_and_grad(W, b, Xs, Y, self.l2)
        step = 1.0
        self.converged_ = False
        for _ in range(self.max_iters):
            grad_inf = max(np.abs(gW).max(initial=0.0), np.abs(gb).max(initial=0.0))
            if grad_inf <= self.tol:
                self.converged_ = True
                break
            g_sq = float(np.sum(gW * gW) + np.sum(gb * gb))
            t = min(step * 2.0, 1e6)  # warm start from the previous step size
            while t > 1e-12:
                new_loss, new_gW, new_gb = loss_and_grad(W - t * gW, b - t * gb, Xs, Y, self.l2)
                if new_loss <= loss - 1e-4 * t * g_sq:
                    break
                t *= 0.5
            if t <= 1e-12:
                break  # no descent direction progress left
            W, b = W - t * gW, b - t * gb
            loss, gW, gb = new_loss, new_gW, new_gb
            step = t
        if not self.converged_:
            logger.warning(
                "logistic regression stopped before tol=%g was reached", self.tol
            )
        self.W_ = W
        self.b_ = b
        return self

    def predict_proba(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        Xs = (X - self.mean_) / self.std_
        return softmax(Xs @ self.W_ + self.b_)

    def predict(self, X) -> np.ndarray:
        return self.classes_[self.predict_proba(X).argmax(axis=1)]
