import numpy as np
from hypothesis import given, settings, strategies as st

from mwpipe.bus import NS_PER_S
from mwpipe.features.windowing import SlidingWindower, make_windows
from oracles import window_count_oracle


def uniform_stream(duration_s, fs):
    n = int(duration_s * fs)
    times = np.array([round(i * NS_PER_S / fs) for i in range(n)], dtype=np.int64)
    return times, np.zeros(n)


def test_60s_stream_gives_31_windows():
    times, vals = uniform_stream(60, 10.0)
    wins = make_windows(times, vals, "st", 10.0, len_s=30, stride_s=1)
    assert len(wins) == 31
    assert len(wins) == window_count_oracle(60, 30, 1)


def test_29s_stream_gives_no_windows():
    times, vals = uniform_stream(29, 10.0)
    assert make_windows(times, vals, "st", 10.0, len_s=30, stride_s=1) == []


def test_stride_equals_len_tiles_without_overlap():
    times, vals = uniform_stream(90, 4.0)
    wins = make_windows(times, vals, "eda", 4.0, len_s=30, stride_s=30)
    assert len(wins) == 3
    for a, b in zip(wins, wins[1:]):
        assert a.t_end_ns == b.t_start_ns


def test_window_spans_exactly_30s_in_ns():
    times, vals = uniform_stream(45, 252.0)
    wins = make_windows(times, vals, "ecg", 252.0, len_s=30, stride_s=1)
    for w in wins:
        assert w.t_end_ns - w.t_start_ns == 30 * NS_PER_S


def test_consecutive_ends_differ_by_stride():
    times, vals = uniform_stream(40, 64.0)
    wins = make_windows(times, vals, "ppg", 64.0, len_s=30, stride_s=1)
    for a, b in zip(wins, wins[1:]):
        assert b.t_end_ns - a.t_end_ns == NS_PER_S


def test_window_contains_half_open_interval():
    fs = 10.0
    times, vals = uniform_stream(40, fs)
    vals = np.arange(len(times), dtype=float)
    wins = make_windows(times, vals, "st", fs, len_s=30, stride_s=1)
    w = wins[0]
    assert times[np.searchsorted(times, w.t_start_ns)] == w.times_ns[0]
    assert np.all(w.times_ns >= w.t_start_ns)
    assert np.all(w.times_ns < w.t_end_ns)
    assert w.n == 300


def test_windower_watermark_gates_emission():
    times, vals = uniform_stream(60, 4.0)
    w = SlidingWindower("eda", 4.0, len_s=30, stride_s=1)
    w.feed(times, vals)
    assert w.advance_to(29 * NS_PER_S) == []
    assert len(w.advance_to(30 * NS_PER_S)) == 1
    assert len(w.advance_to(60 * NS_PER_S)) == 30  # ends 31..60
    assert w.advance_to(60 * NS_PER_S) == []  # no re-emission


def test_windower_incremental_feed_equals_batch():
    times, vals = uniform_stream(45, 4.0)
    vals = np.sin(np.arange(len(vals)) / 7.0)
    batch = make_windows(times, vals, "eda", 4.0, len_s=30, stride_s=1,
                         end_ns=45 * NS_PER_S)
    inc = SlidingWindower("eda", 4.0, len_s=30, stride_s=1)
    out = []
    for cut in (40, 80, 120, len(times)):
        prev = 0 if cut == 40 else {40: 0, 80: 40, 120: 80}.get(cut, 120)
        inc.feed(times[prev:cut], vals[prev:cut])
        out.extend(inc.advance_to(int(times[cut - 1]) + 1))
    out.extend(inc.advance_to(45 * NS_PER_S))
    assert len(out) == len(batch)
    for a, b in zip(out, batch):
        assert a.t_end_ns == b.t_end_ns
        assert np.array_equal(a.values, b.values)


@settings(max_examples=40)
@given(
    duration=st.integers(min_value=1, max_value=240),
    len_s=st.integers(min_value=1, max_value=60),
    stride=st.integers(min_value=1, max_value=30),
)
def test_window_count_matches_enumeration_oracle(duration, len_s, stride):
    times, vals = uniform_stream(duration, 4.0)
    wins = make_windows(times, vals, "eda", 4.0, len_s=len_s, stride_s=stride,
                        end_ns=duration * NS_PER_S)
    assert len(wins) == window_count_oracle(duration, len_s, stride)


def test_empty_input_empty_output():
    assert make_windows(np.empty(0, dtype=np.int64), np.empty(0), "st", 4.0) == []
