"""Window feature extraction.

Three families are available:

``statistical36``
    18 time/frequency statistics for each of theta and theta_dot at 60 Hz.
``wavelet8``
    GHM multiwavelet packet band energies of theta (see :mod:`dddkit.multiwavelet`).
``temporal15``
    mean, standard deviation and AR(1) prediction-error RMS of theta_dot,
    v_x, a_x, a_y and delta at 10 Hz.

Every statistic is computed on stacked windows (rows), so a whole session is
processed in a handful of numpy calls.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import ChannelNotFound, ExtractionError, InsufficientSamples, RateMismatch
from .signal_core import SignalFrame, Window, WindowSpec, resample, slice_at

STAT_NAMES = ("mean", "std", "var", "range", "rms", "energy", "skewness", "kurtosis",
              "q1", "median", "q3", "iqr", "zcr", "hist_entropy",
              "spectral_entropy", "psd_mean", "psd_var", "spectral_centroid")
TEMPORAL_NAMES = ("mean", "std", "pred_err")


@dataclass(frozen=True)
class FeatureFamily:
    id: str
    source_channels: tuple
    rate: float

    @property
    def names(self) -> tuple:
        if self.id == "statistical36":
            return tuple(f"statistical36_{c}_{s}" for c in self.source_channels for s in STAT_NAMES)
        if self.id == "wavelet8":
            return tuple(f"wavelet8_band_{k}" for k in range(8))
        return tuple(f"temporal15_{c}_{s}" for c in self.source_channels for s in TEMPORAL_NAMES)


STATISTICAL36 = FeatureFamily("statistical36", ("theta", "theta_dot"), 60.0)
WAVELET8 = FeatureFamily("wavelet8", ("theta",), 25.0)
TEMPORAL15 = FeatureFamily("temporal15", ("theta_dot", "v_x", "a_x", "a_y", "delta"), 10.0)
FAMILY_ORDER = ("statistical36", "wavelet8", "temporal15")
_DEFAULTS = {f.id: f for f in (STATISTICAL36, WAVELET8, TEMPORAL15)}


def family(fid: str, rate: float | None = None) -> FeatureFamily:
    try:
        base = _DEFAULTS[fid]
    except KeyError:
        raise ValueError(f"unknown feature family {fid!r}") from None
    return base if rate is None else FeatureFamily(base.id, base.source_channels, float(rate))


@dataclass(frozen=True)
class FeatureVector:
    names: tuple
    values: np.ndarray
    window_index: int = -1

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "values", vals)
        if len(self.names) != vals.size:
            raise ExtractionError("names and values differ in length")
        if len(set(self.names)) != len(self.names):
            raise ExtractionError("feature names must be unique")
        if not np.all(np.isfinite(vals)):
            bad = [n for n, v in zip(self.names, vals) if not np.isfinite(v)]
            raise ExtractionError(f"non-finite feature values: {bad}")

    def as_dict(self):
        return dict(zip(self.names, self.values.tolist()))


# -- batch statistics ------------------------------------------------------------

def periodogram(X, rate):
    """One-sided periodogram of the mean-removed rows, density scaling."""
    X = np.atleast_2d(X)
    n = X.shape[1]
    D = X - X.mean(axis=1, keepdims=True)
    P = np.abs(np.fft.rfft(D, axis=1)) ** 2 / (rate * n)
    if n % 2 == 0:
        P[:, 1:-1] *= 2.0
    else:
        P[:, 1:] *= 2.0
    return np.fft.rfftfreq(n, 1.0 / rate), P


def stat18(X, rate) -> np.ndarray:
    """The 18 statistics of every row of ``X`` as an (n, 18) array."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n, w = X.shape
    mean = X.mean(axis=1)
    D = X - mean[:, None]
    var = np.mean(D * D, axis=1)
    std = np.sqrt(var)
    rng = X.max(axis=1) - X.min(axis=1)
    energy = np.sum(X * X, axis=1)
    rms = np.sqrt(energy / w)
    m3 = np.mean(D ** 3, axis=1)
    m4 = np.mean(D ** 4, axis=1)
    flat = var == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        skew = np.where(flat, 0.0, m3 / np.where(flat, 1.0, var) ** 1.5)
        kurt = np.where(flat, 0.0, m4 / np.where(flat, 1.0, var) ** 2 - 3.0)
    q1, med, q3 = np.percentile(X, [25, 50, 75], axis=1)
    zcr = kernels.crossings(np.ascontiguousarray(D)) / max(w - 1, 1)
    hent = kernels.hist_entropy(np.ascontiguousarray(X), kernels.HIST_BINS)

    f, P = periodogram(X, rate)
    tot = P.sum(axis=1)
    has = tot > 0
    safe_tot = np.where(has, tot, 1.0)[:, None]
    p = P / safe_tot
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    sent = np.where(has, -plogp.sum(axis=1), 0.0)
    centroid = np.where(has, (P * f).sum(axis=1) / safe_tot[:, 0], 0.0)
    return np.column_stack([mean, std, var, rng, rms, energy, skew, kurt, q1, med, q3,
                            q3 - q1, zcr, hent, sent, P.mean(axis=1), P.var(axis=1), centroid])


def temporal3(X) -> np.ndarray:
    """Mean, std and AR(1) one-step prediction-error RMS of every row."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] < 3:
        raise InsufficientSamples(f"need at least 3 samples per window, got {X.shape[1]}")
    mean = X.mean(axis=1)
    std = np.sqrt(np.mean((X - mean[:, None]) ** 2, axis=1))
    u, v = X[:, :-1], X[:, 1:]
    du = u - u.mean(axis=1, keepdims=True)
    dv = v - v.mean(axis=1, keepdims=True)
    suu = np.sum(du * du, axis=1)
    suv = np.sum(du * dv, axis=1)
    slope = np.where(suu > 0, suv / np.where(suu > 0, suu, 1.0), 0.0)
    resid = dv - slope[:, None] * du
    pe = np.sqrt(np.mean(resid * resid, axis=1))
    return np.column_stack([mean, std, pe])


# -- single-window API -----------------------------------------------------------

def _family_rows(window: Window, fam: FeatureFamily):
    rows = []
    for cid in fam.source_channels:
        if cid not in window:
            raise ChannelNotFound(cid)
        x = np.asarray(window[cid], dtype=np.float64)
        if window.rate > fam.rate:
            x = resample(x, window.rate, fam.rate)
        elif window.rate < fam.rate:
            raise RateMismatch(f"{fam.id} needs {fam.rate} Hz but the window is at {window.rate} Hz")
        rows.append(x)
    return rows


def statistical36(window: Window, fam: FeatureFamily = STATISTICAL36) -> FeatureVector:
    rows = _family_rows(window, fam)
    vals = np.concatenate([stat18(x[None, :], fam.rate)[0] for x in rows])
    return FeatureVector(fam.names, vals, window.index)


def temporal15(window: Window, fam: FeatureFamily = TEMPORAL15) -> FeatureVector:
    rows = _family_rows(window, fam)
    vals = np.concatenate([temporal3(x[None, :])[0] for x in rows])
    return FeatureVector(fam.names, vals, window.index)


def wavelet8(window: Window, fam: FeatureFamily = WAVELET8) -> FeatureVector:
    from .multiwavelet import wavelet_features

    (x,) = _family_rows(window, fam)
    return FeatureVector(fam.names, wavelet_features(x), window.index)


_EXTRACTORS = {"statistical36": statistical36, "wavelet8": wavelet8, "temporal15": temporal15}


def _resolve(families) -> list[FeatureFamily]:
    fams = [f if isinstance(f, FeatureFamily) else family(f) for f in families]
    return sorted(fams, key=lambda f: FAMILY_ORDER.index(f.id))


def feature_names(families) -> tuple:
    return tuple(n for f in _resolve(families) for n in f.names)


def extract_all(window: Window, families) -> FeatureVector:
    """Concatenate family vectors in the fixed order statistical36, wavelet8, temporal15."""
    parts = [_EXTRACTORS[f.id](window, f) for f in _resolve(families)]
    names = tuple(n for p in parts for n in p.names)
    return FeatureVector(names, np.concatenate([p.values for p in parts]), window.index)


# -- whole-frame batch extraction -------------------------------------------------

def extract_frame(frame: SignalFrame, spec: WindowSpec, families: Iterable,
                  start_times: Sequence[float] | None = None):
    """Features for every window of ``frame``.

    Channels are resampled once per family rate and then sliced at the window
    start times (default: the windows of ``spec`` over ``frame.duration``).
    Returns ``(names, X, keep)`` where ``keep`` flags windows whose slices fit
    inside every resampled channel; rows of dropped windows are zero.
    """
    from .multiwavelet import wavelet_features

    fams = _resolve(families)
    if start_times is None:
        start_times = spec.start_times(int(round(frame.duration * spec.rate)))
    start_times = np.asarray(start_times, dtype=np.float64)
    length = spec.samples / spec.rate
    n = start_times.size
    blocks = []
    keep = np.ones(n, dtype=bool)
    for fam in fams:
        for cid in fam.source_channels:
            frame.channel(cid)
        sub = frame.resampled(fam.rate, fam.source_channels)
        w = int(round(length * fam.rate))
        per_channel = []
        for cid in fam.source_channels:
            x = sub.samples(cid)
            M = np.zeros((n, w))
            for k, t0 in enumerate(start_times):
                sl = slice_at(x, fam.rate, t0, length)
                if sl is None:
                    keep[k] = False
                else:
                    M[k] = sl
            per_channel.append(M)
        if fam.id == "statistical36":
            blocks.extend(stat18(M, fam.rate) for M in per_channel)
        elif fam.id == "temporal15":
            blocks.extend(temporal3(M) for M in per_channel)
        else:
            (M,) = per_channel
            blocks.append(np.vstack([wavelet_features(row) for row in M]) if n else np.zeros((0, 8)))
    names = feature_names(fams)
    X = np.hstack(blocks) if blocks else np.zeros((n, 0))
    X[~keep] = 0.0
    if not np.all(np.isfinite(X)):
        raise ExtractionError("non-finite feature values produced")
    return names, X, keep


def write_features_csv(path, names, X, extra: dict | None = None):
    """CSV with the feature names as header; ``extra`` columns are prepended."""
    extra = extra or {}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(extra) + list(names))
        cols = list(extra.values())
        for i, row in enumerate(np.asarray(X)):
            w.writerow([c[i] for c in cols] + [repr(float(v)) for v in row])


def read_features_csv(path, n_extra: int = 0):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = list(r)
    extra = {h: [row[i] for row in rows] for i, h in enumerate(header[:n_extra])}
    X = np.array([[float(v) for v in row[n_extra:]] for row in rows]).reshape(len(rows), -1)
    return tuple(header[n_extra:]), X, extra
