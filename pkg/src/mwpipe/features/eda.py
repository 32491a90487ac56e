"""Electrodermal tonic/phasic decomposition and derived statistics.

Tonic is an 8 s centered moving median (edge-extended); phasic is the exact
remainder, so tonic + phasic reconstructs the input to machine precision.
A peak starts where the phasic slope exceeds 0.01 uS/s, peaks at the next
local maximum (amplitude >= 0.01 uS above onset), and ends at the first
return to half-amplitude. Onset/peak/duration are found on the phasic
trace; the reported amplitude is the input's rise from onset to peak, which
is insensitive to the tonic-median leakage under slow-moving tonic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..bus import NS_PER_S
from ..errors import WindowTooShort
from .windowing import Window

TONIC_MEDIAN_S = 8.0
ONSET_SLOPE_US_S = 0.01
MIN_PEAK_AMP_US = 0.01


@dataclass
class EdaPeak:
    onset_ns: int
    peak_ns: int
    amplitude_uS: float
    duration_s: float
    slope_uS_per_s: float


@dataclass
class EDADecomposition:
    tonic: np.ndarray
    phasic: np.ndarray
    peaks: list
    times_ns: np.ndarray
    t_start_ns: int
    t_end_ns: int


def _moving_median(x: np.ndarray, k: int) -> np.ndarray:
    half = k // 2
    padded = np.pad(x, half, mode="edge")
    windows = np.lib.stride_tricks.sliding_window_view(padded, k)
    return np.median(windows, axis=1)


def eda_decompose(window: Window) -> EDADecomposition:
    x = np.asarray(window.values, dtype=float)
    if window.n / window.fs_hz < 8.0:
        raise WindowTooShort(f"EDA decomposition needs >= 8 s, got {window.n / window.fs_hz:.1f} s")
    k = int(TONIC_MEDIAN_S * window.fs_hz)
    if k % 2 == 0:
        k += 1
    tonic = _moving_median(x, k)
    phasic = x - tonic
    peaks = _find_peaks(phasic, x, window.times_ns, window.fs_hz)
    return EDADecomposition(tonic, phasic, peaks, window.times_ns,
                            window.t_start_ns, window.t_end_ns)


def _find_peaks(phasic: np.ndarray, raw: np.ndarray, times_ns: np.ndarray, fs: float) -> list:
    n = len(phasic)
    slope = np.diff(phasic) * fs
    peaks = []
    i = 0
    while i < n - 1:
        if slope[i] <= ONSET_SLOPE_US_S:
            i += 1
            continue
        onset = i
        j = onset
        while j + 1 < n and phasic[j + 1] >= phasic[j]:
            j += 1
        phasic_amp = phasic[j] - phasic[onset]
        if phasic_amp >= MIN_PEAK_AMP_US and j > onset:
            amp = raw[j] - raw[onset]
            half_level = phasic[onset] + phasic_amp / 2.0
            k = j
            while k + 1 < n and phasic[k + 1] > half_level:
                k += 1
            end = min(k + 1, n - 1)
            duration = (times_ns[end] - times_ns[onset]) / NS_PER_S
            rise_s = (times_ns[j] - times_ns[onset]) / NS_PER_S
            peaks.append(EdaPeak(int(times_ns[onset]), int(times_ns[j]), float(amp),
                                 float(duration), float(amp / rise_s)))
            i = end
        else:
            i = j + 1
    return peaks


def _window_trapezoid(times_ns: np.ndarray, vals: np.ndarray,
                      t_start_ns: int, t_end_ns: int) -> float:
    """Trapezoidal integral over the full window span, edge-held at both ends."""
    t = (times_ns - t_start_ns) / NS_PER_S
    span = (t_end_ns - t_start_ns) / NS_PER_S
    t_ext = np.concatenate(([0.0], t, [span]))
    v_ext = np.concatenate(([vals[0]], vals, [vals[-1]]))
    return float(np.trapezoid(v_ext, t_ext))


def eda_features(d: EDADecomposition) -> dict:
    """Tonic/phasic statistics plus the phasic-peak block.

    Peak statistics are absent when no peaks were found; the count itself
    is always present (0 is a value, not missing data).
    """
    out: dict[str, float] = {}
    for name, comp in (("tonic", d.tonic), ("phasic", d.phasic)):
        if len(comp) == 0:
            continue
        out[f"{name}_mean_us"] = float(np.mean(comp))
        out[f"{name}_std_us"] = float(np.sqrt(np.mean((comp - np.mean(comp)) ** 2)))
        out[f"{name}_range_us"] = float(np.ptp(comp))
        out[f"{name}_auc_uss"] = _window_trapezoid(d.times_ns, comp, d.t_start_ns, d.t_end_ns)
    out["peak_quantity"] = float(len(d.peaks))
    if d.peaks:
        amps = np.array([p.amplitude_uS for p in d.peaks])
        out["peak_max_us"] = float(amps.max())
        out["peak_min_us"] = float(amps.min())
        out["peak_mean_us"] = float(amps.mean())
        out["peak_mean_duration_s"] = float(np.mean([p.duration_s for p in d.peaks]))
        out["peak_mean_slope_us_s"] = float(np.mean([p.slope_uS_per_s for p in d.peaks]))
    return out
