"""Feature selection: ANOVA-F top-k, Welch t-test filter, wrapper search (SFS, binary PSO)."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import stats

from .data import ExampleSet
from .errors import BudgetTooSmall, DegenerateLabels, InsufficientData

log = logging.getLogger(__name__)

_BIG = np.finfo(np.float64).max


@dataclass
class SelectionResult:
    selected: list
    scores: dict
    method: str
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"method": self.method, "selected": list(self.selected),
                "scores": {k: float(v) for k, v in self.scores.items()},
                **({"details": self.details} if self.details else {})}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def _split_classes(examples: ExampleSet):
    if len(examples) == 0 or np.unique(examples.y).size < 2:
        raise DegenerateLabels("both classes must be present")
    return examples.X[examples.y == 0], examples.X[examples.y == 1]


def anova_f(X, y) -> np.ndarray:
    """One-way ANOVA F statistic of every column (groups given by ``y``)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    classes = np.unique(y)
    n, k = X.shape[0], classes.size
    grand = X.mean(axis=0)
    ss_between = np.zeros(X.shape[1])
    ss_within = np.zeros(X.shape[1])
    for c in classes:
        Xc = X[y == c]
        mc = Xc.mean(axis=0)
        ss_between += Xc.shape[0] * (mc - grand) ** 2
        ss_within += ((Xc - mc) ** 2).sum(axis=0)
    ms_between = ss_between / (k - 1)
    ms_within = ss_within / (n - k)
    with np.errstate(divide="ignore", invalid="ignore"):
        F = ms_between / ms_within
    # exactly separated (zero within-group spread) columns get the largest finite score
    F = np.where(ms_within > 0, F, np.where(ms_between > 0, _BIG, 0.0))
    return F


def _ranked(names, scores, descending=True):
    sign = -1.0 if descending else 1.0
    return sorted(range(len(names)), key=lambda i: (sign * scores[i], names[i]))


def anova_f_topk(examples: ExampleSet, k: int) -> SelectionResult:
    if k < 1:
        raise ValueError("k must be at least 1")
    _split_classes(examples)
    F = anova_f(examples.X, examples.y)
    order = _ranked(examples.names, F)
    selected = [examples.names[i] for i in order[:k]]
    return SelectionResult(selected, dict(zip(examples.names, F.tolist())), "anova_f_topk")


def welch_t(X0, X1):
    """Welch t statistic, Welch-Satterthwaite df and two-sided p per column."""
    X0 = np.atleast_2d(np.asarray(X0, dtype=np.float64))
    X1 = np.atleast_2d(np.asarray(X1, dtype=np.float64))
    n0, n1 = X0.shape[0], X1.shape[0]
    m0, m1 = X0.mean(axis=0), X1.mean(axis=0)
    v0, v1 = X0.var(axis=0, ddof=1), X1.var(axis=0, ddof=1)
    a0, a1 = v0 / n0, v1 / n1
    se2 = a0 + a1
    diff = m1 - m0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = diff / np.sqrt(se2)
        df = se2 ** 2 / (a0 ** 2 / (n0 - 1) + a1 ** 2 / (n1 - 1))
    flat = se2 == 0
    t = np.where(flat, np.where(diff == 0, 0.0, np.sign(diff) * _BIG), t)
    df = np.where(flat, float(n0 + n1 - 2), df)
    p = np.where(flat, np.where(diff == 0, 1.0, 0.0), 2.0 * stats.t.sf(np.abs(t), df))
    return t, df, np.clip(p, 0.0, 1.0)


def t_test_filter(examples: ExampleSet, alpha: float = 0.05) -> SelectionResult:
    """Keep features whose Welch two-sided p-value is below ``alpha``.

    Retained names are ordered by p-value. When nothing passes, the single
    feature with the smallest p-value is kept and ``details['fallback']`` set.
    """
    X0, X1 = _split_classes(examples)
    if X0.shape[0] < 2 or X1.shape[0] < 2:
        raise InsufficientData("the t-test needs at least 2 examples per class")
    t, df, p = welch_t(X0, X1)
    order = _ranked(examples.names, p, descending=False)
    selected = [examples.names[i] for i in order if p[i] < alpha]
    details = {"alpha": alpha, "pvalues": dict(zip(examples.names, p.tolist()))}
    if not selected:
        selected = [examples.names[order[0]]]
        details["fallback"] = True
    return SelectionResult(selected, dict(zip(examples.names, t.tolist())), "t_test", details)


# -- wrapper search --------------------------------------------------------------

class _Fitness:
    """Validation AUC of ``trainer`` on a column subset, memoised per subset."""

    def __init__(self, train: ExampleSet, val: ExampleSet, trainer, budget):
        from .models.metrics import auc_score

        self._auc = auc_score
        self.train, self.val, self.trainer = train, val, trainer
        self.budget = budget
        self.evaluations = 0
        self.cache = {}

    @property
    def exhausted(self):
        return self.evaluations >= self.budget

    def __call__(self, cols) -> float:
        key = tuple(sorted(cols))
        if not key:
            return 0.0
        if key in self.cache:
            return self.cache[key]
        self.evaluations += 1
        cols = list(key)
        model = self.trainer(self.train.X[:, cols], self.train.y)
        scores = model.decision_function(self.val.X[:, cols])
        value = float(self._auc(self.val.y, scores))
        if not np.isfinite(value):
            value = 0.0
        self.cache[key] = value
        return value


def _sfs(fit: _Fitness, d: int, min_improvement: float):
    chosen: list[int] = []
    score_at = {}
    current = -np.inf
    while len(chosen) < d and not fit.exhausted:
        best_c, best_v = -1, -np.inf
        for c in range(d):
            if c in chosen:
                continue
            if fit.exhausted:
                break
            v = fit(chosen + [c])
            if v > best_v:
                best_c, best_v = c, v
        if best_c < 0:
            break
        if chosen and not best_v > current + min_improvement:
            break
        chosen.append(best_c)
        score_at[best_c] = best_v
        current = best_v
    return chosen, score_at, current


def _pso(fit: _Fitness, d: int, seed: int, swarm: int = 20, inertia: float = 0.72,
         cognitive: float = 1.49, social: float = 1.49, vmax: float = 4.0):
    rng = np.random.default_rng(seed)
    x = rng.random((swarm, d)) < 0.5
    v = rng.uniform(-1.0, 1.0, (swarm, d))

    def value(mask):
        return fit(np.flatnonzero(mask).tolist())

    f = np.array([value(p) for p in x])
    pbest, pval = x.copy(), f.copy()
    g = int(np.argmax(pval))
    gbest, gval = pbest[g].copy(), pval[g]
    max_iter = max(fit.budget, 50)
    it = 0
    while not fit.exhausted and it < max_iter:
        it += 1
        r1, r2 = rng.random((swarm, d)), rng.random((swarm, d))
        v = inertia * v + cognitive * r1 * (pbest.astype(float) - x) \
            + social * r2 * (gbest.astype(float) - x)
        np.clip(v, -vmax, vmax, out=v)
        x = rng.random((swarm, d)) < 1.0 / (1.0 + np.exp(-v))
        for i in range(swarm):
            if fit.exhausted:
                break
            fi = value(x[i])
            if fi > pval[i]:
                pbest[i], pval[i] = x[i].copy(), fi
                if fi > gval:
                    gbest, gval = x[i].copy(), fi
    if not gbest.any():
        gbest[int(np.argmax(pbest.sum(axis=0)))] = True
        gval = value(gbest)
    return gbest, pbest.mean(axis=0), gval, it


def wrapper_select(train: ExampleSet, val: ExampleSet, trainer: Callable, budget: int,
                   strategy: str = "sfs", seed: int = 0,
                   min_improvement: float = 1e-4) -> SelectionResult:
    """Subset search scored by validation AUC of models from ``trainer``.

    ``trainer(X, y)`` must return a fitted object with ``decision_function``.
    Only ``train`` and ``val`` are ever touched. ``budget`` caps the number of
    distinct subsets that get a model fitted.
    """
    d = train.n_features
    if train.names != val.names:
        raise ValueError("train and validation sets must share feature names")
    _split_classes(train)
    if budget < d:
        raise BudgetTooSmall(f"budget {budget} is below the feature count {d}")
    fit = _Fitness(train, val, trainer, budget)
    if strategy == "sfs":
        chosen, score_at, best = _sfs(fit, d, min_improvement)
        selected = [train.names[c] for c in chosen]
        scores = {train.names[c]: score_at[c] for c in chosen}
        details = {"validation_auc": best, "evaluations": fit.evaluations}
        return SelectionResult(selected, scores, "wrapper_sfs", details)
    if strategy == "pso":
        mask, freq, best, iters = _pso(fit, d, seed)
        selected = [train.names[c] for c in np.flatnonzero(mask)]
        scores = dict(zip(train.names, freq.tolist()))
        details = {"validation_auc": float(best), "evaluations": fit.evaluations,
                   "iterations": iters}
        return SelectionResult(selected, scores, "wrapper_pso", details)
    raise ValueError(f"unknown wrapper strategy {strategy!r}")
