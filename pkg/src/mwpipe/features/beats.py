"""Beat detection for cardiac windows.

ECG: 5-25 Hz zero-phase band-pass, squared derivative, adaptive threshold at
half the rolling maximum, 250 ms refractory, then R snap to the band-passed
peak. PPG: 0.5-8 Hz band-pass, local maxima above the same half-rolling-max
threshold with the same refractory. Intervals outside (200, 3000) ms are
discarded; fewer than two beats yields an empty interval list.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.ndimage import maximum_filter1d
from scipy.signal import butter, sosfiltfilt

from ..bus import NS_PER_S
from .windowing import Window

REFRACTORY_S = 0.25
ROLLMAX_S = 2.0
INTERVAL_MIN_MS = 200.0
INTERVAL_MAX_MS = 3000.0


@dataclass
class BeatSeries:
    """Detected beat times plus physiologically valid successive intervals."""

    beat_times_ns: np.ndarray
    intervals_ms: np.ndarray = field(default=None)

    def __post_init__(self):
        self.beat_times_ns = np.asarray(self.beat_times_ns, dtype=np.int64)
        if self.intervals_ms is None:
            raw = np.diff(self.beat_times_ns) / 1e6
            self.intervals_ms = raw[(raw > INTERVAL_MIN_MS) & (raw < INTERVAL_MAX_MS)]
        else:
            self.intervals_ms = np.asarray(self.intervals_ms, dtype=float)

    def tachogram(self):
        """(time_s of each interval's closing beat, interval_ms), valid only."""
        raw = np.diff(self.beat_times_ns) / 1e6
        ok = (raw > INTERVAL_MIN_MS) & (raw < INTERVAL_MAX_MS)
        times_s = (self.beat_times_ns[1:][ok] - (self.beat_times_ns[0] if len(self.beat_times_ns) else 0)) / NS_PER_S
        return np.asarray(times_s, dtype=float), raw[ok]


@lru_cache(maxsize=8)
def _bandpass_sos(lo: float, hi: float, fs: float):
    return butter(2, [lo, hi], btype="bandpass", fs=fs, output="sos")


def _local_maxima(x: np.ndarray) -> np.ndarray:
    if len(x) < 3:
        return np.empty(0, dtype=np.int64)
    return np.flatnonzero((x[1:-1] >= x[:-2]) & (x[1:-1] > x[2:])) + 1


def _apply_refractory(indices: np.ndarray, fs: float) -> list[int]:
    keep: list[int] = []
    min_gap = REFRACTORY_S * fs
    for i in indices:
        if not keep or i - keep[-1] >= min_gap:
            keep.append(int(i))
    return keep


def _detect_ecg(x: np.ndarray, fs: float) -> list[int]:
    xf = sosfiltfilt(_bandpass_sos(5.0, 25.0, fs), x)
    energy = (np.diff(xf) * fs) ** 2
    size = max(3, int(ROLLMAX_S * fs) | 1)
    thr = 0.5 * maximum_filter1d(energy, size=size, mode="nearest")
    cands = [i for i in _local_maxima(energy) if energy[i] > thr[i]]
    cands = _apply_refractory(np.asarray(cands), fs)
    # snap each detection to the R peak of the band-passed signal
    half = int(0.06 * fs)
    peaks = []
    for i in cands:
        lo = max(0, i - half)
        hi = min(len(xf), i + half + 1)
        peaks.append(lo + int(np.argmax(xf[lo:hi])))
    peaks = sorted(set(peaks))
    return _apply_refractory(np.asarray(peaks), fs)


def _detect_ppg(x: np.ndarray, fs: float) -> list[int]:
    xf = sosfiltfilt(_bandpass_sos(0.5, 8.0, fs), x)
    size = max(3, int(ROLLMAX_S * fs) | 1)
    thr = 0.5 * maximum_filter1d(xf, size=size, mode="nearest")
    cands = [i for i in _local_maxima(xf) if xf[i] > thr[i] and xf[i] > 0]
    return _apply_refractory(np.asarray(cands), fs)


def detect_beats(window: Window) -> BeatSeries:
    """Detect beats in a cardiac window; flatline input yields no beats."""
    if window.modality not in ("ecg", "ppg"):
        raise ValueError(f"detect_beats expects ecg or ppg, got {window.modality!r}")
    x = np.asarray(window.values, dtype=float)
    if len(x) < 8 or np.ptp(x) == 0.0:
        return BeatSeries(np.empty(0, dtype=np.int64))
    if window.modality == "ecg":
        idx = _detect_ecg(x, window.fs_hz)
    else:
        idx = _detect_ppg(x, window.fs_hz)
    return BeatSeries(window.times_ns[idx])
