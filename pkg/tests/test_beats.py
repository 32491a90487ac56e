import numpy as np

from mwpipe.features.beats import BeatSeries, detect_beats
from mwpipe.features.windowing import Window, make_windows
from mwpipe.synth import SynthProfile, gen_rr_series, render_cardiac


def windows_of(wf, len_s=30, stride_s=30):
    return make_windows(wf.times_ns(), wf.values, wf.modality, wf.fs_hz,
                        len_s=len_s, stride_s=stride_s, end_ns=wf.end_ns)


def test_ecg_constant_rr_intervals_within_one_sample():
    p = SynthProfile(seed=1, duration_s=60, rr_mean_ms=800, rr_sdnn_ms=0, hf_mod_depth_ms=0)
    wf = render_cardiac(gen_rr_series(p), "ecg")
    for w in windows_of(wf):
        b = detect_beats(w)
        assert len(b.beat_times_ns) in (37, 38)
        assert np.all(np.abs(b.intervals_ms - 800.0) <= 4.0)


def test_ecg_beat_times_within_one_sample_of_truth():
    p = SynthProfile(seed=4, duration_s=60, rr_mean_ms=850, rr_sdnn_ms=30, hf_mod_depth_ms=0)
    wf = render_cardiac(gen_rr_series(p), "ecg")
    truth = wf.truth["beat_times_ns"]
    one_sample_ns = round(1e9 / wf.fs_hz)
    for w in windows_of(wf):
        b = detect_beats(w)
        tw = truth[(truth >= w.t_start_ns) & (truth < w.t_end_ns)]
        for t in b.beat_times_ns:
            assert min(abs(int(t) - int(u)) for u in tw) <= one_sample_ns


def test_flatline_gives_empty_series():
    n = 252 * 30
    times = (np.arange(n) * 1e9 / 252).astype(np.int64)
    w = Window("ecg", 0, 30 * 10**9, times, np.zeros(n), 252.0)
    b = detect_beats(w)
    assert len(b.beat_times_ns) == 0
    assert len(b.intervals_ms) == 0


def test_ppg_constant_rr_mean_interval():
    p = SynthProfile(seed=2, duration_s=30, rr_mean_ms=1000, rr_sdnn_ms=0, hf_mod_depth_ms=0)
    wf = render_cardiac(gen_rr_series(p), "ppg")
    (w,) = windows_of(wf)
    b = detect_beats(w)
    assert abs(float(np.mean(b.intervals_ms)) - 1000.0) <= 16.0


def test_ppg_beat_times_track_truth():
    p = SynthProfile(seed=6, duration_s=30, rr_mean_ms=900, rr_sdnn_ms=20, hf_mod_depth_ms=0)
    wf = render_cardiac(gen_rr_series(p), "ppg")
    truth = wf.truth["beat_times_ns"]
    one_sample_ns = round(1e9 / wf.fs_hz)
    (w,) = windows_of(wf)
    b = detect_beats(w)
    for t in b.beat_times_ns:
        assert min(abs(int(t) - int(u)) for u in truth) <= one_sample_ns


def test_nonphysiological_intervals_discarded():
    # two clusters 5 s apart: the 5000 ms gap interval is dropped
    times = np.array([0, 800, 1600, 6600, 7400], dtype=np.int64) * 10**6
    b = BeatSeries(times)
    assert np.all(b.intervals_ms < 3000.0)
    assert len(b.intervals_ms) == 3


def test_fewer_than_two_beats_empty_intervals():
    b = BeatSeries(np.array([10**9], dtype=np.int64))
    assert len(b.intervals_ms) == 0
