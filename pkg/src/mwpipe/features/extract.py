"""Per-window feature dispatch and the streaming extraction pipeline.

A FeatureRow is a pure function of its Window (plus, for PPG, the frozen
session baseline pulse amplitude), so identical windows always produce
bit-identical rows. Rows are computed only when at least 70% of the
window's nominal samples are valid; below that only quality is reported.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import TooManyInvalidSamples
from .beats import detect_beats
from .catalog import FEATURE_CATALOG, MODALITY_RATES
from .eda import eda_decompose, eda_features
from .gaze import DEFAULT_THRESHOLDS, GazeThresholds, classify_gaze, gaze_features
from .hrv import hrv_frequency, hrv_stat_features
from .ppg import ppg_features
from .respiration import resp_features
from .skintemp import st_features
from .windowing import SlidingWindower, Window

MIN_QUALITY = 0.7


@dataclass
class FeatureRow:
    modality: str
    t_end_ns: int
    values: dict
    quality: float


def window_quality(window: Window) -> float:
    expected = max(1, round(window.span_s * window.fs_hz))
    if window.modality == "gaze" and window.n:
        vals = np.asarray(window.values)
        n_valid = int(np.sum(vals[:, 2] > 0))
    else:
        n_valid = window.n
    return min(1.0, n_valid / expected)


def extract_window(window: Window, ppg_baseline_pa: float | None = None,
                   gaze_thresholds: GazeThresholds = DEFAULT_THRESHOLDS) -> FeatureRow:
    """Compute the catalog features for one window of any modality."""
    quality = window_quality(window)
    if quality < MIN_QUALITY:
        return FeatureRow(window.modality, window.t_end_ns, {}, quality)
    m = window.modality
    if m == "ecg":
        beats = detect_beats(window)
        values = hrv_stat_features(beats)
        values.update(hrv_frequency(beats))
    elif m == "ppg":
        beats = detect_beats(window)
        values = ppg_features(window, beats, baseline_pa=ppg_baseline_pa)
    elif m == "resp":
        values = resp_features(window)
    elif m == "eda":
        values = eda_features(eda_decompose(window))
    elif m == "st":
        values = st_features(window)
    elif m == "gaze":
        try:
            events = classify_gaze(window, gaze_thresholds)
        except TooManyInvalidSamples:
            return FeatureRow(m, window.t_end_ns, {}, quality)
        values = gaze_features(events, window)
    else:
        raise ValueError(f"unknown modality {m!r}")
    unknown = set(values) - set(FEATURE_CATALOG[m])
    if unknown:
        raise AssertionError(f"features outside the {m} catalog: {sorted(unknown)}")
    return FeatureRow(m, window.t_end_ns, values, quality)


@dataclass
class FeaturePipeline:
    """Watermark-driven extraction over all modalities at once.

    Feed raw sample blocks per modality, then advance_to(watermark) to
    collect every newly complete row, serialized by (t_end, modality) so
    emission onto feature topics respects the bus ordering contract.
    The PPG baseline is frozen once via set_ppg_baseline (typically when a
    session's baseline phase completes) and is 1.0-equivalent until then.
    """

    len_s: float = 30.0
    stride_s: float = 1.0
    t0_ns: int = 0
    modalities: tuple = tuple(MODALITY_RATES)
    gaze_thresholds: GazeThresholds = DEFAULT_THRESHOLDS
    _windowers: dict = field(init=False)
    ppg_baseline_pa: float | None = field(default=None, init=False)
    _baseline_pa_samples: list = field(default_factory=list, init=False)

    def __post_init__(self):
        self._windowers = {
            m: SlidingWindower(m, MODALITY_RATES[m], self.len_s, self.stride_s, self.t0_ns)
            for m in self.modalities
        }

    def feed(self, modality: str, times_ns, values):
        self._windowers[modality].feed(times_ns, values)

    def set_ppg_baseline(self, pa: float | None):
        if pa is not None and pa > 0:
            self.ppg_baseline_pa = float(pa)

    def freeze_baseline_from_observations(self):
        """Freeze the baseline PA as the mean over rows observed so far."""
        if self._baseline_pa_samples and self.ppg_baseline_pa is None:
            self.set_ppg_baseline(float(np.mean(self._baseline_pa_samples)))

    def advance_to(self, watermark_ns: int) -> list[FeatureRow]:
        rows = []
        for m in self.modalities:
            for window in self._windowers[m].advance_to(watermark_ns):
                row = extract_window(window, ppg_baseline_pa=self.ppg_baseline_pa,
                                     gaze_thresholds=self.gaze_thresholds)
                if m == "ppg" and self.ppg_baseline_pa is None and "digital_pa" in row.values:
                    self._baseline_pa_samples.append(row.values["digital_pa"])
                rows.append(row)
        rows.sort(key=lambda r: (r.t_end_ns, r.modality))
        return rows
