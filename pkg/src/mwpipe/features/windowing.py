"""Sliding windows over timestamped sample arrays.

Windows end at t0+len, t0+len+stride, ...; each holds exactly the samples
with t in [t_end-len, t_end), by integer-nanosecond arithmetic. A window is
emitted only once the stream watermark has reached its end time, so a 29 s
stream yields no windows and a 60 s stream with len 30 / stride 1 yields
exactly 31.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..bus import NS_PER_S


@dataclass
class Window:
    """One extraction window: time-ordered slice of a single modality."""

    modality: str
    t_start_ns: int
    t_end_ns: int
    times_ns: np.ndarray
    values: np.ndarray
    fs_hz: float

    @property
    def span_s(self) -> float:
        return (self.t_end_ns - self.t_start_ns) / NS_PER_S

    @property
    def n(self) -> int:
        return len(self.times_ns)


class _GrowBuffer:
    """Append-only array with doubling capacity (amortized O(1) appends)."""

    def __init__(self, dtype, columns: int = 0):
        self._cols = columns
        shape = (256,) if columns == 0 else (256, columns)
        self._arr = np.empty(shape, dtype=dtype)
        self.n = 0

    def append(self, block: np.ndarray):
        m = len(block)
        if m == 0:
            return
        while self.n + m > len(self._arr):
            shape = (2 * len(self._arr),) if self._cols == 0 else (2 * len(self._arr), self._cols)
            bigger = np.empty(shape, dtype=self._arr.dtype)
            bigger[: self.n] = self._arr[: self.n]
            self._arr = bigger
        self._arr[self.n:self.n + m] = block
        self.n += m

    def view(self) -> np.ndarray:
        return self._arr[: self.n]


class SlidingWindower:
    """Incremental windower fed by sample blocks and an explicit watermark.

    advance_to(w_ns) emits every not-yet-emitted window whose end is <= the
    watermark; windows only ever contain samples strictly before their end,
    so emission at the watermark is exact.
    """

    def __init__(self, modality: str, fs_hz: float, len_s: float = 30.0,
                 stride_s: float = 1.0, t0_ns: int = 0):
        if len_s <= 0 or stride_s <= 0:
            raise ValueError("len_s and stride_s must be positive")
        self.modality = modality
        self.fs_hz = fs_hz
        self.len_ns = round(len_s * NS_PER_S)
        self.stride_ns = round(stride_s * NS_PER_S)
        self._next_end = t0_ns + self.len_ns
        self._times = _GrowBuffer(np.int64)
        self._values: _GrowBuffer | None = None

    def feed(self, times_ns: np.ndarray, values: np.ndarray):
        times_ns = np.asarray(times_ns, dtype=np.int64)
        if not len(times_ns):
            return
        values = np.asarray(values, dtype=float)
        if self._values is None:
            cols = 0 if values.ndim == 1 else values.shape[1]
            self._values = _GrowBuffer(np.float64, cols)
        self._times.append(times_ns)
        self._values.append(values)

    def advance_to(self, watermark_ns: int) -> list[Window]:
        out = []
        while self._next_end <= watermark_ns:
            end = self._next_end
            start = end - self.len_ns
            if self._values is None:
                times = np.empty(0, dtype=np.int64)
                vals = np.empty(0)
            else:
                t_all = self._times.view()
                lo = int(np.searchsorted(t_all, start, side="left"))
                hi = int(np.searchsorted(t_all, end, side="left"))
                times = t_all[lo:hi]
                vals = self._values.view()[lo:hi]
            out.append(Window(self.modality, start, end, times, vals, self.fs_hz))
            self._next_end += self.stride_ns
        return out


def make_windows(times_ns, values, modality: str, fs_hz: float,
                 len_s: float = 30.0, stride_s: float = 1.0,
                 t0_ns: int | None = None, end_ns: int | None = None) -> list[Window]:
    """Batch windowing of a finite stream.

    The stream is taken to span [t0, end); end defaults to one nominal
    sample period past the last sample, so a waveform of duration D yields
    floor((D-len)/stride)+1 windows.
    """
    times_ns = np.asarray(times_ns, dtype=np.int64)
    values = np.asarray(values)
    if len(times_ns) == 0:
        return []
    t0 = t0_ns if t0_ns is not None else int(times_ns[0])
    end = end_ns if end_ns is not None else int(times_ns[-1]) + round(NS_PER_S / fs_hz)
    w = SlidingWindower(modality, fs_hz, len_s, stride_s, t0_ns=t0)
    w.feed(times_ns, values)
    return w.advance_to(end)
