"""Soft-margin SVM trained by SMO on z-scored features."""
from __future__ import annotations

import numpy as np

from .. import kernels
from .base import Classifier, standardize_stats


def kernel_matrix(A, B, kind, gamma):
    if kind == "linear":
        return A @ B.T
    sq = (A * A).sum(axis=1)[:, None] + (B * B).sum(axis=1)[None, :] - 2.0 * (A @ B.T)
    return np.exp(-gamma * np.maximum(sq, 0.0))


def dual_objective(alpha, y, K):
    """``sum(a) - 0.5 a'Qa`` with ``Q = (y y') K`` (the quantity SMO maximises)."""
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


class SVM(Classifier):
    """Binary SVM; decision score is the signed kernel expansion value.

    ``max_passes`` bounds the SMO run at ``max_passes * n`` pair updates. The
    working set is picked deterministically (maximal second-order gain), so
    ``seed`` only exists to keep model configs uniform.
    """

    kind = "svm"
    default_threshold = 0.0

    def __init__(self, C=1.0, kernel="rbf", gamma=None, tol=1e-3, max_passes=100, seed=0):
        if kernel not in ("linear", "rbf"):
            raise ValueError(f"unknown kernel {kernel!r}")
        self.C = float(C)
        self.kernel = kernel
        self.gamma = gamma
        self.tol = float(tol)
        self.max_passes = int(max_passes)
        self.seed = int(seed)

    def get_config(self):
        return {"C": self.C, "kernel": self.kernel, "gamma": self.gamma, "tol": self.tol,
                "max_passes": self.max_passes, "seed": self.seed}

    def fit(self, X, y, feature_names=None):
        X, y = self._check_fit_input(X, y, feature_names)
        self.mean_, self.scale_ = standardize_stats(X)
        Z = (X - self.mean_) / self.scale_
        if self.gamma is None:
            var = Z.var()
            self.gamma_ = 1.0 / (Z.shape[1] * var) if var > 0 else 1.0
        else:
            self.gamma_ = float(self.gamma)
        ys = np.where(y == 1, 1.0, -1.0)
        K = kernel_matrix(Z, Z, self.kernel, self.gamma_)
        max_iter = self.max_passes * max(Z.shape[0], 1)
        alpha, rho, it, conv = kernels.smo_solve(K, ys, self.C, self.tol, max_iter)
        self.alpha_, self.y_ = alpha, ys
        self.iterations_, self.converged_ = int(it), bool(conv)
        self.rho_ = float(rho)
        self.dual_objective_ = dual_objective(alpha, ys, K)
        sv = alpha > 0
        self.support_ = Z[sv]
        self.dual_coef_ = alpha[sv] * ys[sv]
        return self

    def _scores(self, X):
        Z = (X - self.mean_) / self.scale_
        return kernel_matrix(Z, self.support_, self.kernel, self.gamma_) @ self.dual_coef_ - self.rho_

    def _params(self):
        return {"mean": self.mean_, "scale": self.scale_, "gamma": self.gamma_, "rho": self.rho_,
                "support": self.support_, "dual_coef": self.dual_coef_}

    def _set_params(self, p):
        self.mean_, self.scale_ = p["mean"], p["scale"]
        self.gamma_, self.rho_ = float(p["gamma"]), float(p["rho"])
        self.support_ = np.asarray(p["support"], dtype=np.float64).reshape(-1, self.mean_.size)
        self.dual_coef_ = p["dual_coef"]


def fit_svm(examples, config=None) -> SVM:
    return SVM(**(config or {})).fit_examples(examples)
