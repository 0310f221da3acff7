"""Common classifier surface and the versioned JSON model document."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import DataError, DegenerateLabels, FeatureMismatch

FORMAT = "dddkit-model"
FORMAT_VERSION = 1


class Classifier:
    kind = "base"
    default_threshold = 0.5

    feature_names: tuple = ()

    def get_config(self) -> dict:
        raise NotImplementedError

    def _params(self) -> dict:
        raise NotImplementedError

    def _set_params(self, params: dict):
        raise NotImplementedError

    def _scores(self, X) -> np.ndarray:
        raise NotImplementedError

    # -- fitting helpers ---------------------------------------------------------

    def _check_fit_input(self, X, y, feature_names):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y).astype(np.int64)
        if X.ndim != 2 or X.shape[0] != y.size:
            raise ValueError("X must be (n, d) with one label per row")
        if X.shape[0] < 2 or np.unique(y).size < 2:
            raise DegenerateLabels("both classes must be present in the training data")
        if feature_names is None:
            feature_names = [f"x{i}" for i in range(X.shape[1])]
        if len(feature_names) != X.shape[1]:
            raise FeatureMismatch("feature_names does not match the column count")
        self.feature_names = tuple(feature_names)
        return X, y

    def fit_examples(self, examples):
        return self.fit(examples.X, examples.y, examples.names)

    # -- prediction -----------------------------------------------------------------

    def decision_function(self, X, names=None) -> np.ndarray:
        if hasattr(X, "names") and hasattr(X, "values"):  # FeatureVector
            names, X = X.names, X.values
        if names is not None and tuple(names) != self.feature_names:
            raise FeatureMismatch(
                f"features differ from those bound at fit time ({len(self.feature_names)} "
                f"names, got {len(tuple(names))})")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != len(self.feature_names):
            raise FeatureMismatch(f"expected {len(self.feature_names)} columns, got {X.shape[1]}")
        return self._scores(X)

    def predict(self, X, names=None, threshold=None):
        t = self.default_threshold if threshold is None else threshold
        return (self.decision_function(X, names) >= t).astype(np.int64)

    # -- persistence -------------------------------------------------------------

    def to_dict(self) -> dict:
        return {"format": FORMAT, "version": FORMAT_VERSION, "kind": self.kind,
                "config": self.get_config(), "feature_names": list(self.feature_names),
                "params": _encode(self._params())}

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict()))


def _encode(obj):
    if isinstance(obj, np.ndarray):
        return {"__array__": obj.tolist(), "dtype": str(obj.dtype)}
    if isinstance(obj, dict):
        return {k: _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _decode(obj):
    if isinstance(obj, dict):
        if "__array__" in obj:
            return np.array(obj["__array__"], dtype=obj["dtype"])
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    return obj


def model_from_dict(doc) -> Classifier:
    from .forest import RandomForest
    from .logit import LogisticRegression
    from .svm import SVM

    if doc.get("format") != FORMAT:
        raise DataError("not a dddkit model document")
    if doc.get("version") != FORMAT_VERSION:
        raise DataError(f"unsupported model format version {doc.get('version')}")
    cls = {"rf": RandomForest, "svm": SVM, "logit": LogisticRegression}.get(doc.get("kind"))
    if cls is None:
        raise DataError(f"unknown model kind {doc.get('kind')!r}")
    model = cls(**doc["config"])
    model.feature_names = tuple(doc["feature_names"])
    model._set_params(_decode(doc["params"]))
    return model


def load_model(path) -> Classifier:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read model {path}: {exc}") from exc
    return model_from_dict(doc)


def standardize_stats(X):
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    return mu, sd
