"""Pulse-wave morphology features from a PPG window plus its beats.

Per beat: the foot is the minimum preceding the systolic peak, digital pulse
amplitude is peak minus foot, the dicrotic notch is the first local minimum
of the first derivative after the systolic peak, and the diastolic peak is
the first local maximum of the signal after the notch. Beats without a
usable notch contribute no reflection-index or IPA terms.

svri is the window mean pulse amplitude over the session-baseline mean
pulse amplitude (1.0 until a baseline phase has completed).
"""

from __future__ import annotations

import numpy as np

from ..bus import NS_PER_S
from .beats import BeatSeries
from .windowing import Window


def _first_derivative_local_min(d: np.ndarray, lo: int, hi: int) -> int | None:
    for i in range(max(lo, 1), min(hi, len(d) - 1)):
        if d[i] <= d[i - 1] and d[i] < d[i + 1]:
            return i
    return None


def _first_local_max(x: np.ndarray, lo: int, hi: int) -> int | None:
    for i in range(max(lo, 1), min(hi, len(x) - 1)):
        if x[i] >= x[i - 1] and x[i] > x[i + 1]:
            return i
    return None


def ppg_features(window: Window, beats: BeatSeries, baseline_pa: float | None = None) -> dict:
    x = np.asarray(window.values, dtype=float)
    times = window.times_ns
    bt = beats.beat_times_ns
    if len(bt) < 2 or len(x) < 4:
        return {}
    peak_idx = np.searchsorted(times, bt)
    peak_idx = np.clip(peak_idx, 0, len(x) - 1)
    d = np.diff(x)

    pas, ris, aucs, ipas = [], [], [], []
    feet = []
    for k, p in enumerate(peak_idx):
        lo = peak_idx[k - 1] if k > 0 else 0
        if p <= lo:
            feet.append(None)
            continue
        foot = lo + int(np.argmin(x[lo:p + 1]))
        feet.append(foot)
        pas.append(float(x[p] - x[foot]))
    for k, p in enumerate(peak_idx):
        foot = feet[k]
        if foot is None:
            continue
        span_end = feet[k + 1] if k + 1 < len(peak_idx) and feet[k + 1] is not None else None
        bound = span_end if span_end is not None else len(x)
        # a notch only counts when a diastolic peak follows it within the beat
        notch = _first_derivative_local_min(d, p + 1, bound - 1)
        diast = _first_local_max(x, notch + 1, bound) if notch is not None else None
        pa = x[p] - x[foot]
        if notch is not None and diast is not None and pa > 0:
            ris.append(float((x[diast] - x[foot]) / pa))
        if span_end is not None:
            seg_t = (times[foot:span_end + 1] - times[foot]) / NS_PER_S
            seg_v = x[foot:span_end + 1] - x[foot]
            aucs.append(float(np.trapezoid(seg_v, seg_t)))
            if notch is not None and diast is not None and foot < notch < span_end:
                before_t = (times[foot:notch + 1] - times[foot]) / NS_PER_S
                before = float(np.trapezoid(seg_v[: notch - foot + 1], before_t))
                after_t = (times[notch:span_end + 1] - times[notch]) / NS_PER_S
                after = float(np.trapezoid(seg_v[notch - foot:], after_t))
                if before > 0:
                    ipas.append(after / before)

    out: dict[str, float] = {}
    if pas:
        mean_pa = float(np.mean(pas))
        out["digital_pa"] = mean_pa
        out["svri"] = mean_pa / baseline_pa if baseline_pa else 1.0
    if ris:
        out["reflection_index"] = float(np.mean(ris))
    if aucs:
        out["auc"] = float(np.mean(aucs))
    if ipas:
        out["ipa"] = float(np.mean(ipas))
    iv = beats.intervals_ms
    if len(iv) >= 1:
        out["r2r_ms"] = float(np.mean(iv))
    if len(iv) >= 2:
        dd = np.diff(iv)
        out["prv_ms"] = float(np.sqrt(np.mean(dd * dd)))
    return out
