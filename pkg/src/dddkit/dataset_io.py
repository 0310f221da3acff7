"""Session ingestion (CSV + JSON manifest) and synthetic session generation.

On-disk layout of one session::

    manifest.json   {"subject_id", "session_id", "dynamics", "eeg", "events"}
    dynamics.csv    t,theta,theta_dot,v_x,a_x,a_y,delta        (60 Hz)
    eeg.csv         t,eeg_1,...,eeg_8                          (500 Hz, uV)
    events.csv      kind,start,end                             (seconds)

Paths inside the manifest are resolved relative to the manifest file.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError, InvalidProfile, SchemaError, TimestampError
from .signal_core import (DYNAMICS_CHANNELS, DYNAMICS_RATE, EEG_CHANNELS, EEG_RATE,
                          Channel, SignalFrame)

log = logging.getLogger(__name__)

EVENT_KINDS = ("drt", "brake", "question")
DYNAMICS_HEADER = ("t",) + DYNAMICS_CHANNELS
EEG_HEADER = ("t",) + EEG_CHANNELS
EVENTS_HEADER = ("kind", "start", "end")
MAX_GAP = 0.5  # seconds; longer gaps split the session


@dataclass(frozen=True)
class EventInterval:
    kind: str
    start: float
    end: float

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise DataError(f"unknown event kind {self.kind!r}")
        if not self.start < self.end:
            raise DataError(f"event must satisfy start < end, got [{self.start}, {self.end}]")


@dataclass(frozen=True)
class SessionManifest:
    subject_id: str
    session_id: str
    dynamics_path: Path
    eeg_path: Path
    events_path: Path

    @classmethod
    def load(cls, path) -> "SessionManifest":
        path = Path(path)
        try:
            doc = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read manifest {path}: {exc}") from exc
        keys = ("subject_id", "session_id", "dynamics", "eeg", "events")
        for key in keys:
            if key not in doc:
                raise SchemaError(key, f"manifest {path} lacks {key!r}")
        base = path.parent
        return cls(str(doc["subject_id"]), str(doc["session_id"]),
                   base / doc["dynamics"], base / doc["eeg"], base / doc["events"])


@dataclass
class Session:
    """One contiguous recording: the frame plus its events on the frame's clock."""

    frame: SignalFrame
    events: list[EventInterval]
    diagnostics: list[str] = field(default_factory=list)
    offset: float = 0.0  # start of this piece relative to the session origin

    @property
    def session_id(self):
        return self.frame.session_id

    @property
    def subject_id(self):
        return self.frame.subject_id


# -- reading --------------------------------------------------------------------

def _read_numeric_csv(path: Path, header: Sequence[str]):
    path = Path(path)
    try:
        with path.open() as fh:
            first = fh.readline()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    cols = [c.strip() for c in first.strip().split(",")]
    for name in header:
        if name not in cols:
            raise SchemaError(name, f"{path.name}: missing column {name!r}")
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2, dtype=np.float64)
    except ValueError as exc:
        raise SchemaError(header[0], f"{path.name}: unparsable row ({exc})") from exc
    if data.shape[0] and data.shape[1] != len(cols):
        raise SchemaError(header[0], f"{path.name}: expected {len(cols)} columns")
    return data[:, [cols.index(name) for name in header]]


def _drop_nonfinite(data, label, diagnostics):
    bad = ~np.isfinite(data).all(axis=1)
    for row in np.flatnonzero(bad):
        msg = f"{label}: row {row} rejected (non-finite value)"
        diagnostics.append(msg)
        log.warning(msg)
    return data[~bad]


def _check_monotone(t, label):
    bad = np.flatnonzero(np.diff(t) <= 0)
    if bad.size:
        raise TimestampError(int(bad[0]) + 1, f"{label}: timestamp at row {bad[0] + 1} "
                                              f"does not increase")


def _on_grid(t, rate):
    k = np.arange(t.size)
    return np.all(np.abs(t - (t[0] + k / rate)) < 1e-9)


def _grid(t, values, rate, start, n):
    """Values on ``start + k / rate`` for k < n; exact copy when already gridded."""
    if t.size >= n and _on_grid(t, rate):
        lo = int(round((start - t[0]) * rate))
        if 0 <= lo and lo + n <= t.size and abs(t[lo] - start) < 1e-9:
            return values[lo:lo + n]
    grid = start + np.arange(n) / rate
    return np.column_stack([np.interp(grid, t, values[:, c]) for c in range(values.shape[1])])


def read_events(path) -> list[EventInterval]:
    path = Path(path)
    events = []
    try:
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = [h.strip() for h in next(reader, [])]
            for name in EVENTS_HEADER:
                if name not in header:
                    raise SchemaError(name, f"{path.name}: missing column {name!r}")
            ik, i0, i1 = (header.index(n) for n in EVENTS_HEADER)
            for row_no, row in enumerate(reader):
                if not row:
                    continue
                try:
                    start, end = float(row[i0]), float(row[i1])
                except (ValueError, IndexError) as exc:
                    raise SchemaError("start", f"{path.name}: bad event row {row_no}") from exc
                events.append(EventInterval(row[ik].strip(), start, end))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    return merge_events(events)


def merge_events(events):
    """Merge overlapping intervals of the same kind; result sorted by start."""
    out = []
    for kind in EVENT_KINDS:
        same = sorted((e for e in events if e.kind == kind), key=lambda e: (e.start, e.end))
        cur = None
        for e in same:
            if cur is not None and e.start <= cur.end:
                cur = EventInterval(kind, cur.start, max(cur.end, e.end))
            else:
                if cur is not None:
                    out.append(cur)
                cur = e
        if cur is not None:
            out.append(cur)
    return sorted(out, key=lambda e: (e.start, e.end, e.kind))


def load_session(manifest) -> list[Session]:
    """Load one manifest; gaps longer than 0.5 s split it into several pieces.

    Shorter gaps are linearly interpolated. Timestamps are shifted so the first
    valid dynamics sample sits at t = 0.
    """
    if not isinstance(manifest, SessionManifest):
        manifest = SessionManifest.load(manifest)
    diagnostics: list[str] = []
    dyn = _drop_nonfinite(_read_numeric_csv(manifest.dynamics_path, DYNAMICS_HEADER),
                          "dynamics", diagnostics)
    eeg = _drop_nonfinite(_read_numeric_csv(manifest.eeg_path, EEG_HEADER), "eeg", diagnostics)
    if dyn.shape[0] == 0:
        raise DataError(f"{manifest.dynamics_path}: no valid rows")
    _check_monotone(dyn[:, 0], "dynamics")
    _check_monotone(eeg[:, 0], "eeg")
    events = read_events(manifest.events_path)

    origin = dyn[0, 0]
    t_dyn = dyn[:, 0] - origin
    t_eeg = eeg[:, 0] - origin
    cuts = np.flatnonzero(np.diff(t_dyn) > MAX_GAP) + 1
    bounds = np.split(np.arange(t_dyn.size), cuts)
    pieces = []
    for k, idx in enumerate(bounds):
        start, stop = t_dyn[idx[0]], t_dyn[idx[-1]]
        n_dyn = int(math.floor((stop - start) * DYNAMICS_RATE + 1e-6)) + 1
        if not _on_grid(t_dyn[idx], DYNAMICS_RATE):
            diagnostics.append(f"dynamics piece {k}: resampled onto the 60 Hz grid")
        dyn_vals = _grid(t_dyn[idx], dyn[idx, 1:], DYNAMICS_RATE, start, n_dyn)
        duration = n_dyn / DYNAMICS_RATE
        n_eeg = int(round(duration * EEG_RATE))
        in_piece = (t_eeg >= start - MAX_GAP) & (t_eeg <= start + duration + MAX_GAP)
        if in_piece.sum() < 2 or t_eeg[in_piece][0] > start + 1.0 / EEG_RATE + 1e-9 \
                or t_eeg[in_piece][-1] < start + duration - 2.0 / EEG_RATE:
            diagnostics.append(f"piece {k}: EEG does not cover [{start:.3f}, "
                               f"{start + duration:.3f}] s; skipped")
            continue
        eeg_vals = _grid(t_eeg[in_piece], eeg[in_piece, 1:], EEG_RATE, start, n_eeg)
        chans = {cid: Channel(dyn_vals[:, c], DYNAMICS_RATE) for c, cid in enumerate(DYNAMICS_CHANNELS)}
        chans.update({cid: Channel(eeg_vals[:, c], EEG_RATE) for c, cid in enumerate(EEG_CHANNELS)})
        sid = manifest.session_id if len(bounds) == 1 else f"{manifest.session_id}#{k}"
        frame = SignalFrame(chans, duration, sid, manifest.subject_id)
        shifted = [EventInterval(e.kind, e.start - origin - start, e.end - origin - start)
                   for e in events
                   if e.end - origin > start and e.start - origin < start + duration]
        pieces.append(Session(frame, shifted, list(diagnostics), float(start)))
    if not pieces:
        raise DataError(f"{manifest.session_id}: no usable recording piece")
    return pieces


def find_manifests(data) -> list[Path]:
    """A manifest path itself, or every ``manifest.json`` below a directory."""
    data = Path(data)
    if data.is_file():
        return [data]
    if not data.is_dir():
        raise DataError(f"no such data path: {data}")
    found = sorted(data.rglob("manifest.json"))
    if not found:
        raise DataError(f"no manifest.json found under {data}")
    return found


def load_dataset(data) -> list[Session]:
    sessions = []
    for path in find_manifests(data):
        sessions.extend(load_session(path))
    return sessions


# -- writing --------------------------------------------------------------------

def write_session(session: Session, directory) -> Path:
    """Write the session's CSVs and manifest; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    frame = session.frame
    n = frame.samples(DYNAMICS_CHANNELS[0]).size
    dyn = np.column_stack([np.arange(n) / DYNAMICS_RATE] +
                          [frame.samples(c) for c in DYNAMICS_CHANNELS])
    np.savetxt(directory / "dynamics.csv", dyn, fmt="%.17g", delimiter=",",
               header=",".join(DYNAMICS_HEADER), comments="")
    m = frame.samples(EEG_CHANNELS[0]).size
    eeg = np.column_stack([np.arange(m) / EEG_RATE] + [frame.samples(c) for c in EEG_CHANNELS])
    np.savetxt(directory / "eeg.csv", eeg, fmt="%.17g", delimiter=",",
               header=",".join(EEG_HEADER), comments="")
    with (directory / "events.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(EVENTS_HEADER)
        for e in session.events:
            w.writerow([e.kind, repr(e.start), repr(e.end)])
    manifest = {"subject_id": frame.subject_id, "session_id": frame.session_id,
                "dynamics": "dynamics.csv", "eeg": "eeg.csv", "events": "events.csv"}
    path = directory / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path


# -- synthetic sessions ------------------------------------------------------------

@dataclass
class SynthProfile:
    """Knobs of the synthetic driving + EEG generator.

    ``drowsy_episodes`` lists explicit ``(start, end)`` times; when it is
    ``None`` episodes of ``episode_length`` seconds are scattered at random
    until ``drowsy_fraction`` of the session is covered. ``dynamics_effect``
    in [0, 1] scales how strongly drowsiness shows up in the vehicle signals
    (1 gives nearly separable classes, values near 0 an almost invisible
    effect).
    """

    duration: float = 600.0
    drowsy_episodes: list | None = None
    drowsy_fraction: float = 0.3
    episode_length: float = 60.0
    eeg_ratio_factor: float = 3.0
    dynamics_effect: float = 1.0
    dynamics_noise: float = 0.002
    eeg_noise: float = 0.5
    drt: bool = True
    drt_block: float = 120.0
    drt_pause: float = 40.0
    subject_id: str = "S00"
    session_id: str = "synthetic"

    def validate(self):
        if not self.duration > 0:
            raise InvalidProfile(f"duration must be positive, got {self.duration}")
        if self.eeg_ratio_factor < 2:
            raise InvalidProfile("eeg_ratio_factor must be at least 2")
        if not 0 <= self.dynamics_effect <= 1:
            raise InvalidProfile("dynamics_effect must lie in [0, 1]")
        if not 0 <= self.drowsy_fraction < 1:
            raise InvalidProfile("drowsy_fraction must lie in [0, 1)")
        if self.drt_block <= 0 or self.drt_pause < 0:
            raise InvalidProfile("drt_block must be positive and drt_pause non-negative")
        if self.dynamics_noise < 0 or self.eeg_noise < 0:
            raise InvalidProfile("noise levels must be non-negative")
        for ep in self.drowsy_episodes or ():
            if len(ep) != 2 or not 0 <= ep[0] < ep[1]:
                raise InvalidProfile(f"bad drowsy episode {ep!r}")

    @classmethod
    def from_dict(cls, doc) -> "SynthProfile":
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise InvalidProfile(f"unknown profile keys: {sorted(unknown)}")
        return cls(**doc)

    def to_dict(self):
        return asdict(self)


PROFILES = {
    "separable": dict(dynamics_effect=1.0, dynamics_noise=0.001),
    "noisy": dict(dynamics_effect=0.1, dynamics_noise=0.01),
    "flat": dict(drowsy_fraction=0.0),
}


def named_profile(name, **overrides) -> SynthProfile:
    if name not in PROFILES:
        raise InvalidProfile(f"unknown profile {name!r}; choose from {sorted(PROFILES)}")
    return SynthProfile(**{**PROFILES[name], **overrides})


def band_noise(rng, n, rate, lo, hi):
    """Unit-RMS Gaussian noise with its spectrum confined to ``[lo, hi)`` Hz."""
    spec = np.fft.rfft(rng.standard_normal(n))
    f = np.fft.rfftfreq(n, 1.0 / rate)
    spec[(f < lo) | (f >= hi)] = 0.0
    x = np.fft.irfft(spec, n)
    rms = np.sqrt(np.mean(x * x))
    return x / rms if rms > 0 else x


def episode_schedule(profile: SynthProfile, rng) -> list[tuple[float, float]]:
    if profile.drowsy_episodes is not None:
        return [(float(a), min(float(b), profile.duration)) for a, b in profile.drowsy_episodes
                if a < profile.duration]
    target = profile.drowsy_fraction * profile.duration
    if target <= 0:
        return []
    length = min(profile.episode_length, profile.duration)
    n_ep = max(1, int(round(target / length)))
    # evenly spaced slots, jittered inside each slot
    slot = profile.duration / n_ep
    eps = []
    for k in range(n_ep):
        room = max(slot - length, 0.0)
        start = k * slot + rng.uniform(0, room)
        eps.append((start, min(start + length, profile.duration)))
    return eps


def _mask(episodes, n, rate):
    t = np.arange(n) / rate
    m = np.zeros(n)
    for a, b in episodes:
        m[(t >= a) & (t < b)] = 1.0
    return m


def generate_synthetic(profile: SynthProfile, seed: int) -> Session:
    """Deterministic synthetic session for ``(profile, seed)``.

    During drowsy episodes steering micro-corrections slow down and shrink
    while the slow SWA drift grows, lane-offset variance rises, and the EEG
    theta/alpha gains rise so that (theta + alpha) / beta band power is
    ``eeg_ratio_factor`` times its awake value.
    """
    profile.validate()
    rng = np.random.default_rng(seed)
    episodes = episode_schedule(profile, rng)
    e = profile.dynamics_effect

    n = int(round(profile.duration * DYNAMICS_RATE))
    m = _mask(episodes, n, DYNAMICS_RATE)
    fast = band_noise(rng, n, DYNAMICS_RATE, 0.5, 2.0)
    slow = band_noise(rng, n, DYNAMICS_RATE, 0.02, 0.3)
    theta = (0.02 * (1.0 - 0.8 * e * m) * fast + 0.01 * (1.0 + 3.0 * e * m) * slow
             + profile.dynamics_noise * rng.standard_normal(n))
    theta_dot = np.gradient(theta) * DYNAMICS_RATE
    v_x = 29.0 + 0.5 * band_noise(rng, n, DYNAMICS_RATE, 0.005, 0.05) \
        + profile.dynamics_noise * rng.standard_normal(n)
    a_x = 0.2 * band_noise(rng, n, DYNAMICS_RATE, 0.05, 0.5) \
        + profile.dynamics_noise * rng.standard_normal(n)
    a_y = 0.3 * (1.0 + e * m) * band_noise(rng, n, DYNAMICS_RATE, 0.1, 1.0) \
        + profile.dynamics_noise * rng.standard_normal(n)
    delta = 0.15 * (1.0 + 2.0 * e * m) * band_noise(rng, n, DYNAMICS_RATE, 0.01, 0.2) \
        + profile.dynamics_noise * rng.standard_normal(n)
    dyn = dict(zip(DYNAMICS_CHANNELS, (theta, theta_dot, v_x, a_x, a_y, delta)))

    n_eeg = int(round(profile.duration * EEG_RATE))
    me = _mask(episodes, n_eeg, EEG_RATE)
    # awake: theta^2 + alpha^2 = beta^2 (ratio 1); drowsy gains scale the ratio
    boost = 1.0 + (np.sqrt(profile.eeg_ratio_factor) - 1.0) * me
    eeg = {}
    for cid in EEG_CHANNELS:
        scale = rng.uniform(8.0, 12.0)
        th = band_noise(rng, n_eeg, EEG_RATE, 4.0, 8.0)
        al = band_noise(rng, n_eeg, EEG_RATE, 8.0, 13.0)
        be = band_noise(rng, n_eeg, EEG_RATE, 13.0, 20.0)
        broad = band_noise(rng, n_eeg, EEG_RATE, 1.0, 45.0)
        eeg[cid] = scale * (np.sqrt(0.5) * boost * (th + al) + be) + profile.eeg_noise * broad

    chans = {cid: Channel(x, DYNAMICS_RATE) for cid, x in dyn.items()}
    chans.update({cid: Channel(x, EEG_RATE) for cid, x in eeg.items()})
    frame = SignalFrame(chans, n / DYNAMICS_RATE, profile.session_id, profile.subject_id)
    events = _synthetic_events(profile, episodes, rng)
    return Session(frame, events)


def _synthetic_events(profile, episodes, rng):
    events = []
    if profile.drt:
        # the task runs in blocks of drt_block seconds separated by drt_pause
        cycle = profile.drt_block + profile.drt_pause
        t = rng.uniform(6.0, 10.0)
        while t < profile.duration - 3.0:
            if t % cycle >= profile.drt_block:
                t = (t // cycle + 1) * cycle + rng.uniform(0.0, 2.0)
                continue
            drowsy = any(a <= t < b for a, b in episodes)
            rt = rng.uniform(1.0, 2.5) if drowsy else rng.uniform(0.3, 1.0)
            events.append(EventInterval("drt", float(t), float(t + rt)))
            t += rng.uniform(6.0, 10.0)
    for kind, gap in (("brake", 120.0), ("question", 90.0)):
        t = rng.uniform(0.3, 1.0) * gap
        while t < profile.duration - 5.0:
            events.append(EventInterval(kind, float(t), float(t + rng.uniform(2.0, 4.0))))
            t += gap * rng.uniform(0.8, 1.2)
    return merge_events(events)


def synth_dataset(profile: SynthProfile, n_sessions: int, seed: int,
                  n_subjects: int | None = None) -> list[Session]:
    """``n_sessions`` independent sessions with seeds derived from ``seed``."""
    n_subjects = n_subjects or n_sessions
    seeds = np.random.SeedSequence(seed).generate_state(n_sessions)
    out = []
    for k in range(n_sessions):
        p = SynthProfile(**{**profile.to_dict(),
                            "subject_id": f"S{k % n_subjects:02d}",
                            "session_id": f"{profile.session_id}_{k:02d}"})
        out.append(generate_synthetic(p, int(seeds[k])))
    return out
