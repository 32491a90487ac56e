"""Topic-based publish/subscribe hub with a shared session clock.

All timestamps in the pipeline are integer nanoseconds since the session
epoch (t=0). A single monotonic session-relative clock replaces wall time;
the wall-clock epoch is stored once in bag metadata instead.

Per-topic ordering (strictly increasing t and seq) is the only cross-thread
guarantee. Merge and alignment operators are pure functions of their input
streams, so re-running them on the same samples is bit-identical.
"""

from __future__ import annotations

import bisect
import math
import re
import threading
import time
from dataclasses import dataclass
from queue import SimpleQueue
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

from .errors import (
    DuplicateTopic,
    InvalidName,
    SchemaMismatch,
    TimestampRegression,
    UnknownTopic,
)

NS_PER_S = 1_000_000_000

# Half the 10 Hz telemetry period: one telemetry tick of slack.
DEFAULT_ALIGN_TOLERANCE_NS = 50_000_000

_NAME_RE = re.compile(r"^[a-z0-9_]+(\.[a-z0-9_]+)+$")

# Schema field kinds. A trailing "?" marks the field optional.
_KINDS = ("f64", "i64", "bool", "str", "vec")


def ns_from_s(seconds: float) -> int:
    """Convert seconds to integer nanoseconds (round half away from grid drift)."""
    return round(seconds * NS_PER_S)


def sample_time_ns(t0_ns: int, index: int, fs_hz: float) -> int:
    """Time of sample `index` on a uniform grid, rounded per index (no drift)."""
    return t0_ns + round(index * NS_PER_S / fs_hz)


class TimedSample(NamedTuple):
    """One timestamped record on a named topic; the atom of the system."""

    topic: str
    t_ns: int
    seq: int
    payload: dict


class AlignedFrame(NamedTuple):
    """One anchor sample joined with the nearest-in-time sample per other topic."""

    anchor_topic: str
    anchor_t_ns: int
    joined: dict  # topic -> (TimedSample, offset_ns)


@dataclass(frozen=True)
class TopicDescriptor:
    """Name, payload schema, and nominal rate of one topic.

    nominal_rate_hz is metadata only (None = aperiodic); it is never
    enforced on publish but is used by bag validation for gap detection.
    """

    name: str
    schema: Mapping[str, str]
    nominal_rate_hz: float | None = None

    def __post_init__(self):
        if not isinstance(self.name, str) or not _NAME_RE.match(self.name):
            raise InvalidName(f"topic name must be dot-separated words: {self.name!r}")
        if self.nominal_rate_hz is not None and not self.nominal_rate_hz > 0:
            raise InvalidName(f"nominal_rate_hz must be positive: {self.nominal_rate_hz}")
        for fname, kind in self.schema.items():
            if kind.rstrip("?") not in _KINDS:
                raise InvalidName(f"unknown schema kind {kind!r} for field {fname!r}")
        object.__setattr__(self, "schema", dict(self.schema))

    @property
    def schema_id(self) -> str:
        return ",".join(f"{k}:{v}" for k, v in sorted(self.schema.items()))


def _canonical_value(kind: str, value, fname: str):
    if kind == "f64":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaMismatch(f"field {fname!r} expects float, got {type(value).__name__}")
        v = float(value)
        if not math.isfinite(v):
            raise SchemaMismatch(f"field {fname!r} must be finite, got {v}")
        return v
    if kind == "i64":
        if isinstance(value, bool) or not isinstance(value, int):
            raise SchemaMismatch(f"field {fname!r} expects int, got {type(value).__name__}")
        return value
    if kind == "bool":
        if not isinstance(value, bool):
            raise SchemaMismatch(f"field {fname!r} expects bool, got {type(value).__name__}")
        return value
    if kind == "str":
        if not isinstance(value, str):
            raise SchemaMismatch(f"field {fname!r} expects str, got {type(value).__name__}")
        return value
    if kind == "vec":
        if not isinstance(value, (list, tuple)):
            raise SchemaMismatch(f"field {fname!r} expects a float vector")
        out = []
        for x in value:
            if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(float(x)):
                raise SchemaMismatch(f"field {fname!r} vector entries must be finite floats")
            out.append(float(x))
        return tuple(out)
    raise SchemaMismatch(f"unknown kind {kind!r}")


def canonical_payload(schema: Mapping[str, str], payload: Mapping) -> dict:
    """Validate a payload against a schema and return it in schema field order."""
    out = {}
    for fname, kind in schema.items():
        optional = kind.endswith("?")
        base = kind.rstrip("?")
        if fname not in payload:
            if optional:
                continue
            raise SchemaMismatch(f"missing required field {fname!r}")
        out[fname] = _canonical_value(base, payload[fname], fname)
    extra = set(payload) - set(schema)
    if extra:
        raise SchemaMismatch(f"fields not in schema: {sorted(extra)}")
    return out


class ManualClock:
    """Session clock advanced explicitly by the orchestrator."""

    def __init__(self, start_ns: int = 0):
        self._now = start_ns

    def now_ns(self) -> int:
        return self._now

    def advance_to(self, t_ns: int):
        if t_ns < self._now:
            raise TimestampRegression(f"clock cannot move backwards to {t_ns}")
        self._now = t_ns

    def advance(self, dt_ns: int):
        self.advance_to(self._now + dt_ns)


class WallClock:
    """Monotonic wall clock, session-relative from construction time."""

    def __init__(self):
        self._origin = time.monotonic_ns()

    def now_ns(self) -> int:
        return time.monotonic_ns() - self._origin


class Topic:
    """Handle for one registered topic; retains history when retain=True."""

    def __init__(self, desc: TopicDescriptor, retain: bool = True):
        self.desc = desc
        self.retain = retain
        self.samples: list[TimedSample] = []
        self.last_t_ns: int | None = None
        self.next_seq = 0
        self._lock = threading.Lock()
        self._listeners: list[Callable[[TimedSample], None]] = []

    @property
    def name(self) -> str:
        return self.desc.name


class Bus:
    """Publish/subscribe hub. Topics are registered once per session."""

    def __init__(self, clock=None):
        self.clock = clock if clock is not None else ManualClock()
        self._topics: dict[str, Topic] = {}
        self._registry_lock = threading.Lock()
        self._bus_listeners: list[Callable[[TimedSample], None]] = []

    # -- registration ---------------------------------------------------

    def open_topic(self, desc: TopicDescriptor, retain: bool = True) -> Topic:
        with self._registry_lock:
            if desc.name in self._topics:
                raise DuplicateTopic(desc.name)
            topic = Topic(desc, retain=retain)
            self._topics[desc.name] = topic
            return topic

    def topic(self, name: str) -> Topic:
        try:
            return self._topics[name]
        except KeyError:
            raise UnknownTopic(name) from None

    def topics(self) -> list[TopicDescriptor]:
        return [t.desc for t in self._topics.values()]

    # -- publication ----------------------------------------------------

    def publish(self, topic: str | Topic, payload: Mapping, t_ns: int | None = None) -> TimedSample:
        """Publish one sample; t_ns=None stamps with the current session clock."""
        handle = topic if isinstance(topic, Topic) else self.topic(topic)
        data = canonical_payload(handle.desc.schema, payload)
        with handle._lock:
            if t_ns is None:
                t_ns = self.clock.now_ns()
            if handle.last_t_ns is not None and t_ns <= handle.last_t_ns:
                raise TimestampRegression(
                    f"{handle.name}: t={t_ns} not after previous t={handle.last_t_ns}"
                )
            sample = TimedSample(handle.name, t_ns, handle.next_seq, data)
            handle.last_t_ns = t_ns
            handle.next_seq += 1
            if handle.retain:
                handle.samples.append(sample)
            for fn in handle._listeners:
                fn(sample)
            for fn in self._bus_listeners:
                fn(sample)
        return sample

    # -- subscription ---------------------------------------------------

    def subscribe(self, name: str) -> SimpleQueue:
        """Live queue of samples for one topic, in publish order."""
        q: SimpleQueue = SimpleQueue()
        topic = self.topic(name)
        with topic._lock:
            topic._listeners.append(q.put)
        return q

    def add_listener(self, fn: Callable[[TimedSample], None]):
        """Bus-wide listener (used by the bag recorder). Called under the
        publishing topic's lock; cross-topic call order is unspecified."""
        self._bus_listeners.append(fn)

    def subscribe_merged(self, names: Iterable[str]) -> list[TimedSample]:
        """Deterministic merge of the retained history of the given topics."""
        streams = [self.topic(n).samples for n in names]
        return merge_samples(streams)

    def align_nearest(
        self,
        anchor: str,
        others: Iterable[str],
        tolerance_ns: int = DEFAULT_ALIGN_TOLERANCE_NS,
    ) -> list[AlignedFrame]:
        anchor_samples = self.topic(anchor).samples
        other_samples = {n: self.topic(n).samples for n in others}
        return align_nearest_samples(anchor_samples, other_samples, tolerance_ns)


# -- pure stream operators ----------------------------------------------------


def merge_samples(streams: Sequence[Sequence[TimedSample]]) -> list[TimedSample]:
    """Union of per-topic streams in nondecreasing t; ties break by
    (topic name, seq). Inputs must each be time-ordered."""
    out = [s for stream in streams for s in stream]
    out.sort(key=lambda s: (s.t_ns, s.topic, s.seq))
    return out


def _nearest_index(times: Sequence[int], t: int) -> int | None:
    """Index of the sample nearest t; earlier sample wins exact ties."""
    if not times:
        return None
    i = bisect.bisect_right(times, t)
    if i == 0:
        return 0
    if i == len(times):
        return len(times) - 1
    before, after = times[i - 1], times[i]
    # |t-before| <= |after-t| keeps the earlier sample on ties
    return i - 1 if t - before <= after - t else i


def align_nearest_samples(
    anchor_samples: Sequence[TimedSample],
    others: Mapping[str, Sequence[TimedSample]],
    tolerance_ns: int,
) -> list[AlignedFrame]:
    """One frame per anchor sample; each other topic joins its nearest
    sample when |offset| <= tolerance_ns, else is absent from the frame."""
    if tolerance_ns <= 0:
        raise ValueError("tolerance_ns must be positive")
    other_times = {name: [s.t_ns for s in samples] for name, samples in others.items()}
    frames = []
    for a in anchor_samples:
        joined = {}
        for name, samples in others.items():
            idx = _nearest_index(other_times[name], a.t_ns)
            if idx is None:
                continue
            cand = samples[idx]
            offset = cand.t_ns - a.t_ns
            if abs(offset) <= tolerance_ns:
                joined[name] = (cand, offset)
        frames.append(AlignedFrame(a.topic, a.t_ns, joined))
    return frames
