"""Confusion-matrix metrics, ROC sweep and trapezoidal AUC."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class EvalMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    auc: float
    confusion: tuple  # (tp, fp, tn, fn)
    roc: list = field(default_factory=list)
    roc_thresholds: list = field(default_factory=list)
    threshold: float = 0.5

    @property
    def n(self):
        return int(sum(self.confusion))

    def to_json(self, with_roc=True) -> dict:
        tp, fp, tn, fn = self.confusion
        doc = {"accuracy": self.accuracy, "precision": self.precision, "recall": self.recall,
               "f1": self.f1, "auc": self.auc, "threshold": self.threshold,
               "confusion": {"tp": tp, "fp": fp, "tn": tn, "fn": fn}}
        if with_roc:
            doc["roc"] = {"fpr": [p[0] for p in self.roc], "tpr": [p[1] for p in self.roc],
                          "threshold": [_num(t) for t in self.roc_thresholds]}
        return doc


def _num(x):
    x = float(x)
    return "inf" if x == np.inf else x


def roc_curve(y, scores):
    """ROC points from sweeping every distinct score, highest first.

    A window counts as positive when its score is >= the threshold. The first
    point (0, 0) belongs to threshold +inf, the last is (1, 1).
    """
    y = np.asarray(y).astype(bool)
    s = np.asarray(scores, dtype=np.float64)
    order = np.argsort(-s, kind="mergesort")
    s, y = s[order], y[order]
    pos = y.sum()
    neg = y.size - pos
    last = np.r_[np.flatnonzero(np.diff(s) != 0), y.size - 1]
    tps = np.cumsum(y)[last]
    fps = (last + 1) - tps
    tpr = np.r_[0.0, tps / pos if pos else np.zeros(tps.size)]
    fpr = np.r_[0.0, fps / neg if neg else np.zeros(fps.size)]
    thr = np.r_[np.inf, s[last]]
    return fpr, tpr, thr


def trapezoid_auc(fpr, tpr) -> float:
    fpr = np.asarray(fpr, dtype=np.float64)
    tpr = np.asarray(tpr, dtype=np.float64)
    return float(np.sum((fpr[1:] - fpr[:-1]) * (tpr[1:] + tpr[:-1]) / 2.0))


def auc_score(y, scores) -> float:
    y = np.asarray(y)
    if y.size == 0 or y.all() or not y.any():
        return float("nan")
    fpr, tpr, _ = roc_curve(y, scores)
    return trapezoid_auc(fpr, tpr)


def confusion(y, pred):
    y = np.asarray(y).astype(bool)
    pred = np.asarray(pred).astype(bool)
    tp = int(np.sum(y & pred))
    fp = int(np.sum(~y & pred))
    tn = int(np.sum(~y & ~pred))
    fn = int(np.sum(y & ~pred))
    return tp, fp, tn, fn


def rates(tp, fp, tn, fn):
    """(accuracy, precision, recall, f1) in percent; 0/0 is taken as 0."""
    n = tp + fp + tn + fn
    acc = 100.0 * (tp + tn) / n if n else 0.0
    prec = 100.0 * tp / (tp + fp) if tp + fp else 0.0
    rec = 100.0 * tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
    return acc, prec, rec, f1


def metrics_from_scores(y, scores, threshold) -> EvalMetrics:
    y = np.asarray(y)
    scores = np.asarray(scores, dtype=np.float64)
    cm = confusion(y, scores >= threshold)
    acc, prec, rec, f1 = rates(*cm)
    fpr, tpr, thr = roc_curve(y, scores)
    auc = trapezoid_auc(fpr, tpr) if 0 < y.sum() < y.size else float("nan")
    return EvalMetrics(acc, prec, rec, f1, auc, cm,
                       [(float(a), float(b)) for a, b in zip(fpr, tpr)],
                       [float(t) for t in thr], float(threshold))


def evaluate(classifier, examples, threshold=None) -> EvalMetrics:
    """Metrics of ``classifier`` on an ExampleSet (names are checked)."""
    if len(examples) == 0:
        raise ValueError("cannot evaluate on an empty example set")
    if threshold is None:
        threshold = classifier.default_threshold
    scores = classifier.decision_function(examples.X, names=examples.names)
    return metrics_from_scores(examples.y, scores, threshold)
