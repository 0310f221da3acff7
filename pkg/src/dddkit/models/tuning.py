"""Seeded random search over a declared hyperparameter space."""
from __future__ import annotations

import itertools
import math

import numpy as np

from ..errors import InvalidSearchSpace
from .metrics import auc_score


def _is_range(spec):
    return isinstance(spec, dict) and "low" in spec and "high" in spec


def _sample_range(spec, rng):
    lo, hi = float(spec["low"]), float(spec["high"])
    if spec.get("log"):
        return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))
    return float(rng.uniform(lo, hi))


def candidate_configs(space: dict, budget: int, seed: int) -> list[dict]:
    """Configs to try.

    ``space`` maps a parameter to a list of choices or to a
    ``{"low", "high", "log"}`` range. A purely discrete space no larger than
    ``budget`` is enumerated exhaustively in declaration order; otherwise
    ``budget`` configs are drawn (discrete grids without replacement).
    """
    if not space or any((not _is_range(v)) and len(v) == 0 for v in space.values()):
        raise InvalidSearchSpace("search space must declare at least one non-empty parameter")
    if budget < 1:
        raise InvalidSearchSpace("budget must be at least 1")
    keys = list(space)
    rng = np.random.default_rng(seed)
    if not any(_is_range(v) for v in space.values()):
        grid = list(itertools.product(*(space[k] for k in keys)))
        if budget >= len(grid):
            picks = range(len(grid))
        else:
            picks = rng.choice(len(grid), size=budget, replace=False)
        return [dict(zip(keys, grid[int(i)])) for i in picks]
    out = []
    for _ in range(budget):
        cfg = {}
        for k in keys:
            v = space[k]
            cfg[k] = _sample_range(v, rng) if _is_range(v) else v[int(rng.integers(len(v)))]
        out.append(cfg)
    return out


def tune(make_model, train, val, search_space: dict, budget: int, seed: int = 0):
    """Return ``(best_config, best_auc, trials)``.

    ``make_model(config)`` builds an unfitted classifier. Models are fitted on
    ``train`` and scored by AUC on ``val``; the first config reaching the
    maximum wins.
    """
    best_cfg, best = None, -np.inf
    trials = []
    for cfg in candidate_configs(search_space, budget, seed):
        model = make_model(cfg).fit(train.X, train.y, train.names)
        score = auc_score(val.y, model.decision_function(val.X, names=val.names))
        score = score if np.isfinite(score) else -np.inf
        trials.append({"config": cfg, "auc": score})
        if score > best:
            best_cfg, best = cfg, score
    if best_cfg is None:
        best_cfg, best = trials[0]["config"], trials[0]["auc"]
    return best_cfg, best, trials
