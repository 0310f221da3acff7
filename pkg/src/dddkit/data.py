"""Labelled feature tables shared by selection, models and the pipeline."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import DegenerateLabels, FeatureMismatch


@dataclass(frozen=True)
class ExampleSet:
    """Rows of labelled feature vectors.

    ``y`` holds 0 (awake) / 1 (drowsy); unlabeled windows never enter an
    ExampleSet. ``groups`` carries the session id of every row and
    ``subjects`` the subject id.
    """

    X: np.ndarray
    y: np.ndarray
    names: tuple
    groups: np.ndarray = field(default=None)
    subjects: np.ndarray = field(default=None)
    start_times: np.ndarray = field(default=None)
    label_source: str = "eeg"

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(-1, len(self.names)) if len(self.names) else X.reshape(-1, 0)
        y = np.asarray(self.y, dtype=np.int64)
        n = X.shape[0]
        if y.shape != (n,):
            raise ValueError(f"y must have shape ({n},), got {y.shape}")
        if X.shape[1] != len(self.names):
            raise FeatureMismatch(f"{X.shape[1]} columns but {len(self.names)} names")
        if np.any((y != 0) & (y != 1)):
            raise ValueError("labels must be 0 (awake) or 1 (drowsy)")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "names", tuple(self.names))
        for attr, fill in (("groups", ""), ("subjects", ""), ("start_times", np.nan)):
            val = getattr(self, attr)
            val = np.full(n, fill, dtype=object if fill == "" else np.float64) if val is None \
                else np.asarray(val)
            object.__setattr__(self, attr, val)

    def __len__(self):
        return self.X.shape[0]

    @property
    def n_features(self):
        return len(self.names)

    def subset(self, idx) -> "ExampleSet":
        idx = np.asarray(idx)
        return replace(self, X=self.X[idx], y=self.y[idx], groups=self.groups[idx],
                       subjects=self.subjects[idx], start_times=self.start_times[idx])

    def columns(self, names: Sequence[str]) -> "ExampleSet":
        pos = {n: i for i, n in enumerate(self.names)}
        missing = [n for n in names if n not in pos]
        if missing:
            raise FeatureMismatch(f"unknown features: {missing}")
        cols = [pos[n] for n in names]
        return replace(self, X=self.X[:, cols], names=tuple(names))

    def concat(self, other: "ExampleSet") -> "ExampleSet":
        if other.names != self.names:
            raise FeatureMismatch("cannot concatenate sets with different features")
        return replace(self, X=np.vstack([self.X, other.X]), y=np.concatenate([self.y, other.y]),
                       groups=np.concatenate([self.groups, other.groups]),
                       subjects=np.concatenate([self.subjects, other.subjects]),
                       start_times=np.concatenate([self.start_times, other.start_times]))

    def require_both_classes(self):
        if len(self) == 0 or np.unique(self.y).size < 2:
            raise DegenerateLabels("both awake and drowsy examples are required")
