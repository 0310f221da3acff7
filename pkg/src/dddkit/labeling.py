"""Ground-truth labels from EEG band-power ratios or from DRT event intervals.

Labels are small integers so they can live in numpy arrays::

    AWAKE = 0, DROWSY = 1, UNLABELED = -1

Ratios that cannot be formed (beta power below ``MIN_BETA`` or an EEG slice
running past the recording) are ``nan`` and always end up unlabeled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.signal import welch

from .errors import BandError, ChannelNotFound, InsufficientData
from .signal_core import EEG_CHANNELS, SignalFrame, Window, WindowSpec

AWAKE, DROWSY, UNLABELED = 0, 1, -1
STATE_NAMES = {AWAKE: "awake", DROWSY: "drowsy", UNLABELED: "unlabeled"}

THETA_BAND = (4.0, 8.0)
ALPHA_BAND = (8.0, 13.0)
BETA_BAND = (13.0, 20.0)
MIN_BETA = 1e-12

AWAKE_PCT = 0.60
DROWSY_PCT = 0.222
EVENT_MARGIN = 5.0


@dataclass(frozen=True)
class BandPowers:
    theta: float
    alpha: float
    beta: float

    @property
    def ratio(self) -> float:
        if self.beta < MIN_BETA:
            return math.nan
        return (self.theta + self.alpha) / self.beta


def welch_psd(samples, rate):
    """Welch PSD: Hann window, 1 s segments, 50% overlap, density scaling.

    Works along the last axis, so a (channels, samples) block is handled in
    one call.
    """
    x = np.asarray(samples, dtype=np.float64)
    nper = int(round(rate))
    if x.shape[-1] < nper:
        raise InsufficientData(f"need at least 1 s ({nper} samples), got {x.shape[-1]}")
    return welch(x, fs=rate, window="hann", nperseg=nper, noverlap=nper // 2,
                 detrend=False, scaling="density", axis=-1)


def integrate_band(freqs, psd, band):
    """Sum of PSD bins with ``lo <= f < hi`` times the bin width."""
    lo, hi = band
    mask = (freqs >= lo) & (freqs < hi)
    df = freqs[1] - freqs[0]
    return psd[..., mask].sum(axis=-1) * df


def band_power(samples, rate: float, band) -> float:
    lo, hi = band
    if not 0 <= lo < hi or hi * 2 >= rate:
        raise BandError(f"band [{lo}, {hi}] Hz is outside (0, Nyquist={rate / 2}) Hz")
    f, p = welch_psd(samples, rate)
    return float(integrate_band(f, p, band))


def band_powers(block, rate) -> BandPowers:
    """Theta/alpha/beta powers of a (channels, samples) block, averaged over channels."""
    f, p = welch_psd(np.atleast_2d(block), rate)
    th, al, be = (float(integrate_band(f, p, b).mean()) for b in (THETA_BAND, ALPHA_BAND, BETA_BAND))
    return BandPowers(th, al, be)


def ratio_per_window(frame: SignalFrame, spec: WindowSpec, start_times=None) -> np.ndarray:
    """(theta + alpha) / beta for every dynamics window of ``spec``.

    ``start_times`` defaults to the windows ``segment`` would cut from a
    channel of ``frame.duration`` seconds at ``spec.rate``.
    """
    if start_times is None:
        n_ref = int(round(frame.duration * spec.rate))
        start_times = spec.start_times(n_ref)
    chans = [c for c in EEG_CHANNELS if c in frame]
    if not chans:
        raise ChannelNotFound(EEG_CHANNELS[0])
    rate = frame.rate(chans[0])
    length = spec.samples / spec.rate
    data = np.vstack([frame.samples(c) for c in chans])
    out = np.full(len(start_times), np.nan)
    blocks, rows = [], []
    for k, t0 in enumerate(start_times):
        lo = int(math.floor(t0 * rate + 0.5))
        w = int(round(length * rate))
        if lo + w <= data.shape[1]:
            blocks.append(data[:, lo:lo + w])
            rows.append(k)
    if not blocks:
        return out
    f, p = welch_psd(np.stack(blocks), rate)  # (windows, channels, freqs)
    th, al, be = (integrate_band(f, p, b).mean(axis=1) for b in (THETA_BAND, ALPHA_BAND, BETA_BAND))
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(be >= MIN_BETA, (th + al) / be, np.nan)
    out[rows] = r
    return out


def _nearest_rank(n, q):
    # round() guards against 0.778 * 10000 = 7780.000000000001
    return max(1, math.ceil(round(q * n, 9)))


def label_by_eeg(ratios, awake_pct: float = AWAKE_PCT, drowsy_pct: float = DROWSY_PCT,
                 groups: Sequence | None = None) -> np.ndarray:
    """Percentile labels: lowest ``awake_pct`` awake, highest ``drowsy_pct`` drowsy.

    Thresholds are nearest-rank percentiles of the finite ratios. A value tied
    with the awake threshold is awake; at the drowsy threshold a tie that also
    occurs below the threshold rank stays unlabeled. A distribution with a
    single distinct value is left entirely unlabeled. With ``groups`` the
    percentiles are taken separately within each group (per-subject mode).
    """
    r = np.asarray(ratios, dtype=np.float64)
    if groups is not None:
        groups = np.asarray(groups)
        out = np.full(r.size, UNLABELED, dtype=np.int64)
        for g in np.unique(groups):
            sel = groups == g
            out[sel] = label_by_eeg(r[sel], awake_pct, drowsy_pct)
        return out
    labels = np.full(r.size, UNLABELED, dtype=np.int64)
    ok = np.isfinite(r)
    vals = np.sort(r[ok])
    n = vals.size
    if n < 10:
        raise InsufficientData(f"need at least 10 finite ratios, got {n}")
    if vals[0] == vals[-1]:
        return labels
    ra = _nearest_rank(n, awake_pct)
    rd = _nearest_rank(n, 1.0 - drowsy_pct)
    t_awake = vals[ra - 1]
    t_drowsy = vals[rd - 1]
    x = r[ok]
    lab = np.full(x.size, UNLABELED, dtype=np.int64)
    tied_below = rd >= 2 and vals[rd - 2] == t_drowsy
    drowsy = x > t_drowsy if tied_below else x >= t_drowsy
    lab[drowsy] = DROWSY
    lab[x <= t_awake] = AWAKE
    labels[ok] = lab
    return labels


def label_by_event(windows: Sequence[Window] | np.ndarray, events, margin: float = EVENT_MARGIN,
                   length: float | None = None, kinds=("drt",)) -> np.ndarray:
    """Event labels for windows ``[s, s + length)``.

    Intervals are read as half-open ``[start, end)``. A window overlapping any
    selected interval is drowsy. A window lying wholly within ``margin``
    seconds before an interval start, ``[start - margin, start)``, or after its
    end, ``[end, end + margin)``, and overlapping no interval is awake.
    Everything else is unlabeled.
    """
    if margin < 0:
        raise ValueError("margin must be non-negative")
    if length is None:
        starts = np.array([w.start_time for w in windows], dtype=np.float64)
        ends = np.array([w.end_time for w in windows], dtype=np.float64)
    else:
        starts = np.asarray(windows, dtype=np.float64)
        ends = starts + length
    ivs = [(e.start, e.end) for e in events if e.kind in kinds]
    labels = np.full(starts.size, UNLABELED, dtype=np.int64)
    if not ivs:
        return labels
    a = np.array([iv[0] for iv in ivs])[None, :]
    b = np.array([iv[1] for iv in ivs])[None, :]
    s = starts[:, None]
    e = ends[:, None]
    overlap = ((s < b) & (e > a)).any(axis=1)
    before = ((s >= a - margin) & (e <= a)).any(axis=1)
    after = ((s >= b) & (e <= b + margin)).any(axis=1)
    labels[(before | after) & ~overlap] = AWAKE
    labels[overlap] = DROWSY
    return labels
