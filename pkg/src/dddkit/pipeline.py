"""Experiment orchestration: configs, presets, splits, runs and comparison reports."""
from __future__ import annotations

import copy
import hashlib
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .data import ExampleSet
from .errors import (ConfigError, DDDError, LeakageNotAcknowledged, PipelineError,
                     SplitError)
from .features import FAMILY_ORDER, extract_frame, family
from .labeling import (AWAKE, AWAKE_PCT, DROWSY, DROWSY_PCT, EVENT_MARGIN, UNLABELED,
                       label_by_eeg, label_by_event, ratio_per_window)
from .models import make_model
from .models.metrics import EvalMetrics, metrics_from_scores, roc_curve, trapezoid_auc
from .models.tuning import tune
from .multiwavelet import DEPTH, packet_decompose, prefilter
from .selection import SelectionResult, anova_f_topk, t_test_filter, wrapper_select
from .signal_core import WindowSpec

METHODS = ("svma", "svmw", "lstm_lite", "rf")
SELECTORS = ("none", "anova_f_topk", "t_test", "wrapper_sfs", "wrapper_pso")
SPLIT_KINDS = ("holdout", "train_test", "kfold", "none")
EVAL_TARGETS = ("test", "train", "all")
TABLE_COLUMNS = ("AUC", "Accuracy (%)", "Precision (%)", "Recall (%)")


# -- configuration ----------------------------------------------------------------

@dataclass
class PipelineConfig:
    """Everything that defines one experiment; JSON keys mirror the field names.

    ``split`` is one of ``{"kind": "holdout", "ratios": [tr, va, te]}``,
    ``{"kind": "train_test", "ratio": tr}``, ``{"kind": "kfold", "k": k}`` or
    ``{"kind": "none"}``. Evaluating on training data (``eval_target`` train or
    all, or ``split`` none) is refused unless ``leakage_ack`` is set.
    """

    method: str = "rf"
    label_source: str = "eeg"
    split: dict = field(default_factory=lambda: {"kind": "holdout", "ratios": [0.8, 0.1, 0.1]})
    eval_target: str = "test"
    window: dict = field(default_factory=lambda: {"length": 3.0, "overlap": 0.5, "rate": 60.0})
    thresholds: dict = field(default_factory=lambda: {"awake_pct": AWAKE_PCT,
                                                      "drowsy_pct": DROWSY_PCT})
    event_margin: float = EVENT_MARGIN
    seed: int = 0
    leakage_ack: bool = False
    whole_session: bool = False
    group_split: bool = False
    label_mode: str = "pooled"
    families: list = field(default_factory=lambda: list(FAMILY_ORDER))
    feature_rates: dict = field(default_factory=dict)
    selection: dict = field(default_factory=lambda: {"method": "none"})
    model: dict = field(default_factory=lambda: {"kind": "rf", "config": {}})
    tune: dict = field(default_factory=lambda: {"space": {}, "budget": 0})
    threshold: float | None = None
    max_hours: float | None = None

    @property
    def window_spec(self) -> WindowSpec:
        return WindowSpec(float(self.window["length"]), float(self.window.get("overlap", 0.0)),
                          float(self.window.get("rate", 60.0)))

    @property
    def leaky(self) -> bool:
        return self.eval_target != "test" or self.split.get("kind") == "none"

    def validate(self) -> "PipelineConfig":
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.label_source not in ("eeg", "event"):
            raise ConfigError(f"label_source must be eeg or event, got {self.label_source!r}")
        if self.eval_target not in EVAL_TARGETS:
            raise ConfigError(f"eval_target must be one of {EVAL_TARGETS}")
        if self.label_mode not in ("pooled", "per_subject"):
            raise ConfigError("label_mode must be pooled or per_subject")
        _validate_split(self.split)
        if self.split["kind"] == "none" and self.eval_target == "test":
            raise ConfigError("split none leaves no test fold; use eval_target train or all")
        if set(self.window) - {"length", "overlap", "rate"}:
            raise ConfigError(f"unknown window keys {sorted(set(self.window) - {'length', 'overlap', 'rate'})}")
        try:
            self.window_spec
        except DDDError as exc:
            raise ConfigError(str(exc)) from exc
        a, d = self.thresholds.get("awake_pct"), self.thresholds.get("drowsy_pct")
        if a is None or d is None or not (0 < a and 0 < d and a + d <= 1):
            raise ConfigError("thresholds need awake_pct, drowsy_pct > 0 with sum <= 1")
        if self.event_margin < 0:
            raise ConfigError("event_margin must be non-negative")
        if not self.families or any(f not in FAMILY_ORDER for f in self.families):
            raise ConfigError(f"families must be a non-empty subset of {FAMILY_ORDER}")
        if set(self.feature_rates) - set(FAMILY_ORDER):
            raise ConfigError("feature_rates keys must be feature family ids")
        if self.selection.get("method", "none") not in SELECTORS:
            raise ConfigError(f"selection.method must be one of {SELECTORS}")
        if self.model.get("kind") not in ("rf", "svm", "logit"):
            raise ConfigError("model.kind must be rf, svm or logit")
        if set(self.model) - {"kind", "config"}:
            raise ConfigError("model accepts only kind and config")
        if set(self.tune) - {"space", "budget"}:
            raise ConfigError("tune accepts only space and budget")
        if self.max_hours is not None and not self.max_hours > 0:
            raise ConfigError("max_hours must be positive")
        return self

    def check_leakage(self):
        if self.leaky and not self.leakage_ack:
            raise LeakageNotAcknowledged(
                f"eval_target={self.eval_target!r} with split={self.split['kind']!r} scores the "
                "model on data it was trained on; pass leakage_ack to run it deliberately")

    def to_dict(self) -> dict:
        return copy.deepcopy(asdict(self))

    @classmethod
    def from_dict(cls, doc: dict) -> "PipelineConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        base = {}
        if "method" in doc:
            if doc["method"] not in METHODS:
                raise ConfigError(f"method must be one of {METHODS}, got {doc['method']!r}")
            base = preset(doc["method"], "c2").to_dict()
        return cls(**{**base, **copy.deepcopy(doc)}).validate()

    @classmethod
    def from_json(cls, path) -> "PipelineConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(doc)


def _validate_split(split):
    kind = split.get("kind") if isinstance(split, dict) else None
    if kind not in SPLIT_KINDS:
        raise ConfigError(f"split.kind must be one of {SPLIT_KINDS}")
    if kind == "holdout":
        r = split.get("ratios")
        if r is None or len(r) != 3 or min(r) < 0 or abs(sum(r) - 1.0) > 1e-9:
            raise ConfigError("holdout ratios must be three non-negative numbers summing to 1")
    elif kind == "train_test":
        r = split.get("ratio")
        if r is None or not 0 < r < 1:
            raise ConfigError("train_test ratio (train fraction) must lie in (0, 1)")
    elif kind == "kfold":
        k = split.get("k")
        if not isinstance(k, int) or k < 2:
            raise ConfigError("kfold k must be an integer >= 2")


_METHOD_SETUP = {
    "svma": dict(families=["statistical36"],
                 selection={"method": "wrapper_sfs", "budget": 150, "min_improvement": 1e-4},
                 model={"kind": "svm", "config": {"kernel": "rbf"}},
                 tune={"space": {"C": [0.5, 1.0, 4.0]}, "budget": 3}),
    "svmw": dict(families=["wavelet8"], selection={"method": "none"},
                 model={"kind": "svm", "config": {"kernel": "rbf"}},
                 tune={"space": {"C": [0.5, 1.0, 4.0]}, "budget": 3}),
    "lstm_lite": dict(families=["temporal15"], selection={"method": "t_test", "alpha": 0.05},
                      model={"kind": "logit", "config": {}},
                      tune={"space": {"l2": [0.1, 1.0, 10.0]}, "budget": 3}),
    "rf": dict(families=list(FAMILY_ORDER), selection={"method": "anova_f_topk", "k": 20},
               model={"kind": "rf", "config": {"n_trees": 200}},
               tune={"space": {"max_depth": [None, 12]}, "budget": 2}),
}


def preset(method: str, config: str = "c2") -> PipelineConfig:
    """Method preset; ``c2`` is the shared clean protocol, ``c1`` the per-method original."""
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}; choose from {METHODS}")
    config = config.lower()
    if config not in ("c1", "c2"):
        raise ConfigError("preset config must be c1 or c2")
    cfg = PipelineConfig(method=method, **copy.deepcopy(_METHOD_SETUP[method]))
    if config == "c1":
        if method == "svma":
            cfg.split = {"kind": "none"}
            cfg.eval_target = "train"
        elif method == "svmw":
            cfg.split = {"kind": "train_test", "ratio": 0.3}
            cfg.whole_session = True
            cfg.eval_target = "all"
        elif method == "lstm_lite":
            cfg.split = {"kind": "kfold", "k": 5}
            cfg.label_source = "event"
            cfg.window = {"length": 10.0, "overlap": 0.0, "rate": 10.0}
            # awake windows must fit wholly inside a margin, so it has to exceed 10 s
            cfg.event_margin = 20.0
        # rf has no original configuration; c1 equals c2
    return cfg.validate()


# -- example construction -------------------------------------------------------

def select_sessions(sessions, max_hours, seed):
    """Seeded subset of sessions whose total duration stays within ``max_hours``."""
    if max_hours is None:
        return list(sessions)
    order = np.random.default_rng(seed).permutation(len(sessions))
    budget, total, out = max_hours * 3600.0, 0.0, []
    for i in order:
        dur = sessions[i].frame.duration
        if out and total + dur > budget:
            continue
        out.append(sessions[i])
        total += dur
    return sorted(out, key=lambda s: sessions.index(s))


def whole_session_wavelet(samples, rate, start_times, length):
    """Band energies per window from one packet decomposition of the whole signal.

    Depth-3 leaf coefficient ``j`` summarises input samples
    ``[16 j, 16 j + 16)``; a window collects the coefficients whose span lies
    inside it. Windows holding no complete coefficient are flagged in ``keep``.
    """
    tree = packet_decompose(prefilter(samples))
    span = 2 * 2 ** DEPTH
    coef = np.stack(tree.leaves)  # (8, m, 2)
    energy = (coef * coef).sum(axis=2)  # (8, m)
    csum = np.concatenate([np.zeros((8, 1)), np.cumsum(energy, axis=1)], axis=1)
    m = energy.shape[1]
    w = int(round(length * rate))
    X = np.zeros((len(start_times), 8))
    keep = np.zeros(len(start_times), dtype=bool)
    for k, t0 in enumerate(start_times):
        lo = int(math.floor(t0 * rate + 0.5))
        j0 = -(-lo // span)
        j1 = min((lo + w) // span, m)
        if j1 > j0:
            X[k] = csum[:, j1] - csum[:, j0]
            keep[k] = True
    return X, keep


def _session_features(session, cfg: PipelineConfig, starts, cache):
    spec = cfg.window_spec
    blocks, names = [], []
    keep = np.ones(starts.size, dtype=bool)
    for fid in FAMILY_ORDER:
        if fid not in cfg.families:
            continue
        fam = family(fid, cfg.feature_rates.get(fid))
        whole = cfg.whole_session and fid == "wavelet8"
        key = (session.session_id, session.offset, fid, fam.rate, whole, spec)
        if key not in cache:
            if whole:
                x = session.frame.resampled(fam.rate, ("theta",)).samples("theta")
                X, kp = whole_session_wavelet(x, fam.rate, starts, spec.length)
                cache[key] = (fam.names, X, kp)
            else:
                cache[key] = extract_frame(session.frame, spec, [fam], starts)
        n, X, kp = cache[key]
        names.extend(n)
        blocks.append(X)
        keep &= kp
    return tuple(names), np.hstack(blocks), keep


def build_examples(sessions, cfg: PipelineConfig, cache=None):
    """Window, label and extract every session; returns ``(ExampleSet, counts)``."""
    cache = {} if cache is None else cache
    spec = cfg.window_spec
    per = []
    for s in sessions:
        starts = spec.start_times(int(round(s.frame.duration * spec.rate)))
        per.append((s, starts))
    # labels
    if cfg.label_source == "eeg":
        ratios = []
        for s, starts in per:
            key = ("ratio", s.session_id, s.offset, spec)
            if key not in cache:
                cache[key] = ratio_per_window(s.frame, spec, starts)
            ratios.append(cache[key])
        groups = None
        if cfg.label_mode == "per_subject":
            groups = np.concatenate([np.full(st.size, s.subject_id, dtype=object)
                                     for s, st in per])
        labels = label_by_eeg(np.concatenate(ratios) if ratios else np.zeros(0),
                              cfg.thresholds["awake_pct"], cfg.thresholds["drowsy_pct"], groups)
    else:
        labels = np.concatenate([label_by_event(st, s.events, cfg.event_margin, spec.length)
                                 for s, st in per]) if per else np.zeros(0, dtype=np.int64)
    counts = {"windows": int(labels.size), "awake": int(np.sum(labels == AWAKE)),
              "drowsy": int(np.sum(labels == DROWSY)),
              "unlabeled": int(np.sum(labels == UNLABELED))}
    # features
    rows, ys, groups, subjects, times = [], [], [], [], []
    names = None
    pos = 0
    dropped = 0
    for s, starts in per:
        lab = labels[pos:pos + starts.size]
        pos += starts.size
        use = lab != UNLABELED
        if not use.any():
            continue
        n, X, keep = _session_features(s, cfg, starts, cache)
        names = n
        use &= keep
        dropped += int(np.sum((lab != UNLABELED) & ~keep))
        rows.append(X[use])
        ys.append(lab[use])
        groups.append(np.full(int(use.sum()), s.session_id, dtype=object))
        subjects.append(np.full(int(use.sum()), s.subject_id, dtype=object))
        times.append(starts[use] + s.offset)
    if names is None:
        names = tuple(n for fid in FAMILY_ORDER if fid in cfg.families
                      for n in family(fid, cfg.feature_rates.get(fid)).names)
        ex = ExampleSet(np.zeros((0, len(names))), np.zeros(0), names,
                        label_source=cfg.label_source)
    else:
        ex = ExampleSet(np.vstack(rows), np.concatenate(ys), names, np.concatenate(groups),
                        np.concatenate(subjects), np.concatenate(times), cfg.label_source)
    counts["dropped_short"] = dropped
    counts["examples"] = len(ex)
    return ex, counts


# -- splitting ------------------------------------------------------------------------

def _partition(n_units, sizes_frac, rng):
    perm = rng.permutation(n_units)
    cuts = []
    acc = 0
    for r in sizes_frac[:-1]:
        acc += int(round(r * n_units))
        cuts.append(min(acc, n_units))
    return np.split(perm, cuts)


def split_examples(examples: ExampleSet, split: dict, seed: int, group: bool = False) -> list[dict]:
    """Fold assignment(s) as row-index arrays.

    Returns one ``{"train", "val", "test"}`` dict per evaluation round: one for
    holdout, train_test and none, ``k`` for kfold. With ``group`` the shuffle
    and partition act on sessions so no session straddles two folds.
    """
    _validate_split(split)
    n = len(examples)
    if n == 0:
        raise SplitError("no examples to split")
    rng = np.random.default_rng(seed)
    if group:
        units, inverse = np.unique(examples.groups.astype(str), return_inverse=True)
        n_units = units.size
    else:
        n_units, inverse = n, np.arange(n)

    def rows(unit_idx):
        if not group:
            return np.sort(unit_idx)
        return np.flatnonzero(np.isin(inverse, unit_idx))

    empty = np.zeros(0, dtype=np.int64)
    kind = split["kind"]
    if kind == "none":
        return [{"train": np.arange(n), "val": empty, "test": empty}]
    if kind == "holdout":
        ratios = split["ratios"]
        tr, va, te = _partition(n_units, ratios, rng)
        out = {"train": rows(tr), "val": rows(va), "test": rows(te)}
        for name, r in zip(("train", "val", "test"), ratios):
            if r > 0 and out[name].size == 0:
                raise SplitError(f"split ratios {ratios} leave the {name} fold empty "
                                 f"({n_units} {'sessions' if group else 'examples'})")
        return [out]
    if kind == "train_test":
        tr, te = _partition(n_units, [split["ratio"], 1 - split["ratio"]], rng)
        out = {"train": rows(tr), "val": empty, "test": rows(te)}
        if out["train"].size == 0 or out["test"].size == 0:
            raise SplitError(f"train_test ratio {split['ratio']} leaves a fold empty")
        return [out]
    k = split["k"]
    if k > n_units:
        raise SplitError(f"kfold k={k} exceeds the {n_units} available units")
    parts = np.array_split(rng.permutation(n_units), k)
    out = []
    for i in range(k):
        train_units = np.concatenate([p for j, p in enumerate(parts) if j != i])
        out.append({"train": rows(train_units), "val": empty, "test": rows(parts[i])})
    return out


class FoldedData:
    """Fold views of one ExampleSet; every read is appended to ``log``."""

    def __init__(self, examples: ExampleSet, assignment: dict, round_index: int = 0, log=None):
        self.examples = examples
        self.assignment = assignment
        self.round = round_index
        self.log = [] if log is None else log

    def size(self, fold):
        return int(self.assignment[fold].size)

    def get(self, fold: str, stage: str) -> ExampleSet:
        self.log.append({"round": self.round, "fold": fold, "stage": stage})
        return self.examples.subset(self.assignment[fold])


def test_reads_before_evaluation(log) -> int:
    return sum(1 for e in log if e["fold"] == "test" and e["stage"] != "evaluate")


# -- one experiment ------------------------------------------------------------------

class _Stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, et, exc, tb):
        if exc is not None and not isinstance(exc, (PipelineError, ConfigError)) \
                and isinstance(exc, (DDDError, ValueError, ArithmeticError)):
            raise PipelineError(self.name, exc) from exc
        return False


def _select(cfg, train, val, model_cfg):
    sel = cfg.selection
    method = sel.get("method", "none")
    if method == "none":
        return SelectionResult(list(train.names), {n: 0.0 for n in train.names}, "none")
    if method == "anova_f_topk":
        return anova_f_topk(train, min(int(sel.get("k", train.n_features)), train.n_features))
    if method == "t_test":
        return t_test_filter(train, float(sel.get("alpha", 0.05)))
    kind = cfg.model["kind"]

    def trainer(X, y):
        return make_model(kind, model_cfg).fit(X, y)

    budget = int(sel.get("budget", max(train.n_features, 100)))
    return wrapper_select(train, val, trainer, budget, method.split("_")[1], cfg.seed,
                          float(sel.get("min_improvement", 1e-4)))


def _run_round(cfg: PipelineConfig, data: FoldedData):
    val_fold = "val" if data.size("val") else "train"
    with _Stage("select"):
        train = data.get("train", "select")
        train.require_both_classes()
        val = data.get(val_fold, "select")
        base_cfg = dict(cfg.model.get("config", {}))
        if cfg.model["kind"] == "rf":
            base_cfg.setdefault("seed", cfg.seed)
        sel = _select(cfg, train, val, base_cfg)
        names = list(sel.selected)
    with _Stage("tune"):
        tuning = None
        model_cfg = base_cfg
        if int(cfg.tune.get("budget", 0)) > 0:
            tr = data.get("train", "tune").columns(names)
            va = data.get(val_fold, "tune").columns(names)
            best, score, trials = tune(lambda c: make_model(cfg.model["kind"], {**base_cfg, **c}),
                                       tr, va, cfg.tune.get("space", {}),
                                       int(cfg.tune["budget"]), cfg.seed)
            model_cfg = {**base_cfg, **best}
            tuning = {"best": best, "validation_auc": _num(score),
                      "trials": [{"config": t["config"], "auc": _num(t["auc"])} for t in trials],
                      "validation_fold": val_fold}
    with _Stage("fit"):
        model = make_model(cfg.model["kind"], model_cfg)
        model.fit_examples(data.get("train", "fit").columns(names))
    with _Stage("evaluate"):
        if cfg.eval_target == "test":
            target = data.get("test", "evaluate")
        elif cfg.eval_target == "train":
            target = data.get("train", "evaluate")
        else:
            target = data.get("train", "evaluate")
            for fold in ("val", "test"):
                if data.size(fold):
                    target = target.concat(data.get(fold, "evaluate"))
        target = target.columns(names)
        if len(target) == 0:
            raise PipelineError("evaluate", ValueError("evaluation fold is empty"))
        scores = model.decision_function(target.X, names=target.names)
        thr = model.default_threshold if cfg.threshold is None else float(cfg.threshold)
        metrics = metrics_from_scores(target.y, scores, thr)
    info = {"round": data.round,
            "sizes": {f: data.size(f) for f in ("train", "val", "test")},
            "selection": sel.to_json(), "tuning": tuning, "model_config": model_cfg,
            "metrics": metrics.to_json(with_roc=False)}
    return info, metrics, target.y, scores, model


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _fingerprint(examples: ExampleSet, rounds) -> str:
    h = hashlib.sha256()
    keys = [f"{g}@{t!r}" for g, t in zip(examples.groups, examples.start_times)]
    for r in rounds:
        for fold in ("train", "val", "test"):
            h.update(fold.encode())
            h.update("|".join(sorted(keys[i] for i in r[fold])).encode())
    return h.hexdigest()[:16]


def run_experiment(config: PipelineConfig, sessions, cache=None, return_model=False):
    """label -> window -> extract -> select -> tune -> fit -> evaluate.

    Returns the report dict (see ``report_json``). Selection and tuning read
    only the train and validation folds; when there is no validation fold
    they fall back to the training fold. Every fold read is recorded in
    ``report["access_log"]``.
    """
    cfg = config.validate()
    cfg.check_leakage()
    t_start = time.time()
    with _Stage("load"):
        sessions = select_sessions(list(sessions), cfg.max_hours, cfg.seed)
        if not sessions:
            raise PipelineError("load", ValueError("no sessions"))
    with _Stage("extract"):
        examples, counts = build_examples(sessions, cfg, cache)
    with _Stage("split"):
        rounds = split_examples(examples, cfg.split, cfg.seed, cfg.group_split)
    log: list = []
    infos, per_metrics, ys, scores = [], [], [], []
    model = None
    for i, r in enumerate(rounds):
        info, m, y, s, model = _run_round(cfg, FoldedData(examples, r, i, log))
        infos.append(info)
        per_metrics.append(m)
        ys.append(y)
        scores.append(s)
    y_all, s_all = np.concatenate(ys), np.concatenate(scores)
    metrics = _aggregate(per_metrics, y_all, s_all)
    warnings = []
    if counts["examples"] and min(counts["awake"], counts["drowsy"]) == 0:
        warnings.append("only one class present after labeling")
    report = {
        "format": "dddkit-report", "version": 1,
        "method": cfg.method,
        "config": cfg.to_dict(),
        "data": {"sessions": [s.session_id for s in sessions], **counts,
                 "features": list(examples.names)},
        "split": {"rounds": len(rounds), "fingerprint": _fingerprint(examples, rounds)},
        "selected_features": infos[0]["selection"]["selected"],
        "folds": infos,
        "metrics": metrics,
        "access_log": log,
        "test_reads_before_evaluation": test_reads_before_evaluation(log),
        "warnings": warnings,
        "run": {"seed": cfg.seed, "code_version": __version__,
                "timestamps": {"started": t_start, "finished": time.time()}},
    }
    return (report, model) if return_model else report


def _aggregate(per_metrics: list[EvalMetrics], y, scores) -> dict:
    """Single-round metrics as-is; k rounds: mean of each metric, summed confusion, pooled ROC."""
    if len(per_metrics) == 1:
        doc = per_metrics[0].to_json()
        doc["auc"] = _num(doc["auc"])
        return doc
    keys = ("accuracy", "precision", "recall", "f1", "auc")
    doc = {k: _num(np.mean([getattr(m, k) for m in per_metrics])) for k in keys}
    tot = np.sum([m.confusion for m in per_metrics], axis=0)
    doc["confusion"] = dict(zip(("tp", "fp", "tn", "fn"), (int(v) for v in tot)))
    doc["threshold"] = per_metrics[0].threshold
    fpr, tpr, thr = roc_curve(y, scores)
    doc["roc"] = {"fpr": fpr.tolist(), "tpr": tpr.tolist(),
                  "threshold": ["inf" if t == np.inf else float(t) for t in thr]}
    doc["pooled_auc"] = _num(trapezoid_auc(fpr, tpr))
    return doc


def report_json(report: dict, timestamps: bool = False) -> str:
    """Canonical JSON text; timestamps are stripped unless requested."""
    doc = copy.deepcopy(report)
    if not timestamps:
        doc.get("run", {}).pop("timestamps", None)
        for sub in doc.get("runs", []):
            sub.get("run", {}).pop("timestamps", None)
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


# -- comparison ------------------------------------------------------------------------

def compare(configs: list[PipelineConfig], sessions, out_dir=None) -> dict:
    """Run several configs on the same data and tabulate AUC / accuracy / precision / recall."""
    if len(configs) < 2:
        raise ConfigError("compare needs at least two configs")
    seeds = {c.seed for c in configs}
    if len(seeds) != 1:
        raise ConfigError(f"compare needs one shared seed, got {sorted(seeds)}")
    sessions = list(sessions)
    cache: dict = {}
    runs = [run_experiment(c, sessions, cache) for c in configs]
    warnings = []
    if len({c.label_source for c in configs}) > 1:
        warnings.append("label sources differ across methods: "
                        + ", ".join(f"{c.method}={c.label_source}" for c in configs))
    prints = {r["split"]["fingerprint"] for r in runs}
    if len(prints) > 1:
        warnings.append("fold assignments differ across methods (different windows or labels)")
    rows = []
    for r in runs:
        m = r["metrics"]
        rows.append({"method": r["method"], "AUC": m["auc"], "Accuracy (%)": m["accuracy"],
                     "Precision (%)": m["precision"], "Recall (%)": m["recall"]})
    report = {"format": "dddkit-comparison", "version": 1, "columns": list(TABLE_COLUMNS),
              "table": rows, "shared_split": len(prints) == 1, "warnings": warnings,
              "runs": runs}
    if out_dir is not None:
        write_comparison(report, out_dir)
    return report


def render_table(report: dict) -> str:
    head = f"{'method':<12}" + "".join(f"{c:>16}" for c in TABLE_COLUMNS)
    lines = [head, "-" * len(head)]
    for row in report["table"]:
        auc = row["AUC"]
        cells = [f"{auc:.3f}" if auc is not None else "n/a"]
        cells += [f"{row[c]:.1f}" for c in TABLE_COLUMNS[1:]]
        lines.append(f"{row['method']:<12}" + "".join(f"{c:>16}" for c in cells))
    return "\n".join(lines) + "\n"


def roc_csv(metrics: dict) -> str:
    roc = metrics["roc"]
    out = ["fpr,tpr,threshold"]
    for f, t, th in zip(roc["fpr"], roc["tpr"], roc["threshold"]):
        th = "inf" if th is None or th == "inf" else repr(float(th))
        out.append(f"{float(f)!r},{float(t)!r},{th}")
    return "\n".join(out) + "\n"


def read_roc_csv(path):
    data = np.genfromtxt(path, delimiter=",", names=True)
    return data["fpr"], data["tpr"], data["threshold"]


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def roc_svg(curves: dict, size: int = 400) -> str:
    """Self-contained SVG with one polyline per ROC curve."""
    pad = 40
    span = size - 2 * pad

    def pt(f, t):
        return f"{pad + f * span:.2f},{pad + (1 - t) * span:.2f}"

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}" font-family="sans-serif" font-size="11">',
             f'<rect x="{pad}" y="{pad}" width="{span}" height="{span}" fill="none" stroke="#000"/>',
             f'<line x1="{pad}" y1="{pad + span}" x2="{pad + span}" y2="{pad}" '
             'stroke="#aaa" stroke-dasharray="4 3"/>',
             f'<text x="{size / 2:.0f}" y="{size - 8}" text-anchor="middle">False positive rate</text>',
             f'<text x="12" y="{size / 2:.0f}" transform="rotate(-90 12 {size / 2:.0f})" '
             'text-anchor="middle">True positive rate</text>']
    for k, (label, (fpr, tpr, auc)) in enumerate(curves.items()):
        color = _COLORS[k % len(_COLORS)]
        pts = " ".join(pt(f, t) for f, t in zip(fpr, tpr))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        auc_txt = "n/a" if auc is None else f"{auc:.3f}"
        parts.append(f'<text x="{pad + span - 4}" y="{pad + span - 8 - 14 * k}" '
                     f'text-anchor="end" fill="{color}">{label} (AUC {auc_txt})</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_comparison(report: dict, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report_json(report))
    (out / "run.json").write_text(json.dumps(
        {r["method"]: r["run"].get("timestamps") for r in report["runs"]}, indent=2) + "\n")
    (out / "table.txt").write_text(render_table(report))
    curves = {}
    for r in report["runs"]:
        m = r["metrics"]
        (out / f"roc_{r['method']}.csv").write_text(roc_csv(m))
        curves[r["method"]] = (m["roc"]["fpr"], m["roc"]["tpr"], m["auc"])
    (out / "roc.svg").write_text(roc_svg(curves))
    return out
