"""Time-series containers, downsampling and sliding-window segmentation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import ChannelNotFound, DataError, RateMismatch, UnsupportedResample

DYNAMICS_CHANNELS = ("theta", "theta_dot", "v_x", "a_x", "a_y", "delta")
EEG_CHANNELS = tuple(f"eeg_{i}" for i in range(1, 9))
KNOWN_CHANNELS = frozenset(DYNAMICS_CHANNELS + EEG_CHANNELS)

DYNAMICS_RATE = 60.0
EEG_RATE = 500.0


@dataclass(frozen=True)
class Channel:
    samples: np.ndarray
    rate: float

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        if self.rate <= 0:
            raise DataError(f"sample rate must be positive, got {self.rate}")
        if arr.ndim != 1 or arr.size == 0:
            raise DataError("channel samples must be a non-empty 1-D array")


@dataclass(frozen=True)
class SignalFrame:
    """Synchronised multichannel recording of one driving session."""

    channels: Mapping[str, Channel]
    duration: float
    session_id: str = ""
    subject_id: str = ""

    def __post_init__(self):
        chans = {}
        for cid, ch in self.channels.items():
            if cid not in KNOWN_CHANNELS:
                raise DataError(f"unknown channel id {cid!r}")
            if not isinstance(ch, Channel):
                ch = Channel(*ch)
            expected = round(ch.rate * self.duration)
            if abs(ch.samples.size - expected) > 1:
                raise DataError(
                    f"channel {cid!r} has {ch.samples.size} samples, expected "
                    f"{expected} for {self.duration} s at {ch.rate} Hz")
            chans[cid] = ch
        object.__setattr__(self, "channels", chans)

    @classmethod
    def from_arrays(cls, arrays: Mapping[str, np.ndarray], rates: Mapping[str, float],
                    session_id="", subject_id="", duration=None):
        if duration is None:
            # duration is taken from the first channel
            cid = next(iter(arrays))
            duration = len(arrays[cid]) / rates[cid]
        chans = {cid: Channel(np.asarray(a, dtype=np.float64), float(rates[cid]))
                 for cid, a in arrays.items()}
        return cls(chans, float(duration), session_id, subject_id)

    def __contains__(self, cid):
        return cid in self.channels

    def channel(self, cid) -> Channel:
        try:
            return self.channels[cid]
        except KeyError:
            raise ChannelNotFound(cid) from None

    def samples(self, cid) -> np.ndarray:
        return self.channel(cid).samples

    def rate(self, cid) -> float:
        return self.channel(cid).rate

    def resampled(self, rate: float, channels: Iterable[str] | None = None) -> "SignalFrame":
        """Copy of the frame with ``channels`` (default: all) brought down to ``rate``."""
        names = list(self.channels) if channels is None else list(channels)
        out = {}
        for cid in names:
            ch = self.channel(cid)
            if ch.rate == rate:
                out[cid] = ch
            else:
                out[cid] = Channel(resample(ch.samples, ch.rate, rate), rate)
        return SignalFrame(out, self.duration, self.session_id, self.subject_id)


@dataclass(frozen=True)
class WindowSpec:
    length: float
    overlap: float = 0.0
    rate: float = DYNAMICS_RATE

    def __post_init__(self):
        if not 0.0 <= self.overlap < 1.0:
            raise DataError(f"overlap must lie in [0, 1), got {self.overlap}")
        if self.rate <= 0 or self.length <= 0:
            raise DataError("window length and rate must be positive")
        if self.samples < 1:
            raise DataError("window must span at least one sample")
        if self.stride < 1:
            raise DataError("window stride must be at least one sample")

    @property
    def samples(self) -> int:
        return int(round(self.length * self.rate))

    @property
    def stride(self) -> int:
        return round_half_down(self.samples * (1.0 - self.overlap))

    def count(self, n: int) -> int:
        """Number of full windows that fit in ``n`` samples."""
        w, s = self.samples, self.stride
        return 0 if n < w else (n - w) // s + 1

    def start_times(self, n: int) -> np.ndarray:
        return np.arange(self.count(n)) * self.stride / self.rate


@dataclass(frozen=True)
class Window:
    index: int
    start_time: float
    length: float
    rate: float
    samples_per_channel: Mapping[str, np.ndarray] = field(repr=False)

    def __getitem__(self, cid) -> np.ndarray:
        try:
            return self.samples_per_channel[cid]
        except KeyError:
            raise ChannelNotFound(cid) from None

    def __contains__(self, cid):
        return cid in self.samples_per_channel

    @property
    def end_time(self) -> float:
        return self.start_time + self.length


def round_half_down(x: float) -> int:
    """Nearest integer, ties rounded towards minus infinity."""
    return int(math.ceil(x - 0.5))


def segment(frame: SignalFrame, spec: WindowSpec, channels: Iterable[str]) -> list[Window]:
    """Cut ``frame`` into full windows; a trailing partial window is dropped."""
    channels = list(channels)
    arrays = {}
    for cid in channels:
        ch = frame.channel(cid)
        if ch.rate != spec.rate:
            raise RateMismatch(
                f"channel {cid!r} is at {ch.rate} Hz but the window spec expects "
                f"{spec.rate} Hz; resample first")
        arrays[cid] = ch.samples
    if not arrays:
        return []
    n = min(a.size for a in arrays.values())
    w, s = spec.samples, spec.stride
    windows = []
    for i in range(spec.count(n)):
        lo = i * s
        windows.append(Window(i, lo / spec.rate, w / spec.rate, spec.rate,
                              {cid: a[lo:lo + w] for cid, a in arrays.items()}))
    return windows


def window_matrix(samples: np.ndarray, spec: WindowSpec) -> np.ndarray:
    """All full windows of a single channel stacked as rows (read-only view)."""
    samples = np.asarray(samples, dtype=np.float64)
    n = spec.count(samples.size)
    if n == 0:
        return np.empty((0, spec.samples))
    view = np.lib.stride_tricks.sliding_window_view(samples, spec.samples)
    return view[::spec.stride][:n]


def slice_at(samples: np.ndarray, rate: float, start_time: float, length: float):
    """Samples covering ``[start_time, start_time + length)`` or ``None`` past the end."""
    lo = int(math.floor(start_time * rate + 0.5))
    w = int(round(length * rate))
    if lo < 0 or lo + w > samples.size:
        return None
    return samples[lo:lo + w]


def lowpass_taps(cutoff: float, rate: float, n_taps: int = 101) -> np.ndarray:
    """Hamming-windowed sinc low-pass with unit DC gain (odd, symmetric)."""
    m = np.arange(n_taps) - (n_taps - 1) / 2
    fc = cutoff / rate
    h = 2 * fc * np.sinc(2 * fc * m) * np.hamming(n_taps)
    return h / h.sum()


def resample(samples, from_rate: float, to_rate: float) -> np.ndarray:
    """Downsample by zero-phase FIR low-pass filtering and linear interpolation.

    The output has ``round(N * to_rate / from_rate)`` samples placed at
    ``k / to_rate`` seconds. The filter cut-off sits at 80% of the target
    Nyquist frequency.
    """
    if from_rate <= 0 or to_rate <= 0:
        raise UnsupportedResample("sample rates must be positive")
    if to_rate > from_rate:
        raise UnsupportedResample(f"upsampling {from_rate} -> {to_rate} Hz is not supported")
    x = np.asarray(samples, dtype=np.float64)
    if to_rate == from_rate:
        return x.copy()
    n_out = int(round(x.size * to_rate / from_rate))
    taps = lowpass_taps(0.4 * to_rate, from_rate)
    half = taps.size // 2
    # filtering the deviation from the first sample keeps constants bit-exact
    offset = x[0]
    # symmetric taps centred on each sample => zero phase
    padded = np.pad(x - offset, half, mode="reflect" if x.size > 1 else "edge")
    y = np.convolve(padded, taps, mode="valid") + offset
    t = np.arange(n_out) * (from_rate / to_rate)
    return np.interp(t, np.arange(x.size), y)
