"""L2-regularised logistic regression (stand-in for the recurrent Lstm classifier)."""
from __future__ import annotations

import numpy as np

from .base import Classifier, standardize_stats


def _log1pexp(z):
    return np.logaddexp(0.0, z)


def loss_and_grad(theta, Z, s, l2):
    """Mean logistic loss plus ``l2 / (2n) * |w|^2`` and its gradient.

    ``theta = (w..., b)``; ``s`` holds labels as -1/+1. The intercept is not
    penalised.
    """
    n = Z.shape[0]
    w, b = theta[:-1], theta[-1]
    m = s * (Z @ w + b)
    loss = _log1pexp(-m).mean() + 0.5 * l2 * (w @ w) / n
    g = -s / (1.0 + np.exp(m))  # d loss_i / d margin-input
    grad = np.empty_like(theta)
    grad[:-1] = Z.T @ g / n + l2 * w / n
    grad[-1] = g.mean()
    return float(loss), grad


class LogisticRegression(Classifier):
    kind = "logit"
    default_threshold = 0.5

    def __init__(self, l2=1.0, max_iter=500, tol=1e-6):
        self.l2 = float(l2)
        self.max_iter = int(max_iter)
        self.tol = float(tol)

    def get_config(self):
        return {"l2": self.l2, "max_iter": self.max_iter, "tol": self.tol}

    def fit(self, X, y, feature_names=None):
        X, y = self._check_fit_input(X, y, feature_names)
        self.mean_, self.scale_ = standardize_stats(X)
        Z = (X - self.mean_) / self.scale_
        s = np.where(y == 1, 1.0, -1.0)
        theta = np.zeros(Z.shape[1] + 1)
        f, g = loss_and_grad(theta, Z, s, self.l2)
        step = 1.0
        self.iterations_ = 0
        for it in range(self.max_iter):
            if np.max(np.abs(g)) < self.tol:
                break
            gg = g @ g
            # Armijo backtracking
            while True:
                cand = theta - step * g
                fc, gc = loss_and_grad(cand, Z, s, self.l2)
                if fc <= f - 0.5 * step * gg or step < 1e-12:
                    break
                step *= 0.5
            theta, f, g = cand, fc, gc
            step = min(step * 2.0, 1e3)
            self.iterations_ = it + 1
        self.coef_, self.intercept_ = theta[:-1].copy(), float(theta[-1])
        self.loss_ = f
        return self

    def _scores(self, X):
        Z = (X - self.mean_) / self.scale_
        return 1.0 / (1.0 + np.exp(-(Z @ self.coef_ + self.intercept_)))

    def _params(self):
        return {"mean": self.mean_, "scale": self.scale_, "coef": self.coef_,
                "intercept": self.intercept_}

    def _set_params(self, p):
        self.mean_, self.scale_, self.coef_ = p["mean"], p["scale"], p["coef"]
        self.intercept_ = float(p["intercept"])


def fit_logit(examples, config=None) -> LogisticRegression:
    return LogisticRegression(**(config or {})).fit_examples(examples)
