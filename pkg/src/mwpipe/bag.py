"""Bag persistence: write, read, replay, and validate session logs.

Format: a text file whose first line is the magic, second line the manifest
(session metadata, wall-clock epoch, topic descriptors with schemas), then
one JSON record per line — {"t": ns, "topic": name, "seq": n, "data": {...}}
— globally nondecreasing in t with ties broken by (topic, seq). Integer
nanosecond stamps and shortest-round-trip float encoding make replay and
re-extraction bit-exact. A truncated final line is tolerated by readers.
"""

from __future__ import annotations

import json
import threading
import time
import warnings
from dataclasses import dataclass, field

from .bus import Bus, ManualClock, TimedSample, TopicDescriptor
from .errors import CorruptBag, UnknownMagic

MAGIC = "MWBAG1"


def _record_line(sample: TimedSample) -> str:
    data = json.dumps(sample.payload, separators=(",", ":"), allow_nan=False)
    return f'{{"t":{sample.t_ns},"topic":"{sample.topic}","seq":{sample.seq},"data":{data}}}\n'


class BagWriter:
    """Buffers published samples and writes them in merged timestamp order.

    flush_until(w) may be called whenever the orchestrator can guarantee no
    future publish carries t < w (e.g. at watermarks/phase boundaries); the
    manifest is written on the first flush so the file stays readable after
    abnormal termination.
    """

    def __init__(self, path, bus: Bus, session_meta: dict | None = None):
        self.path = str(path)
        self._bus = bus
        self._meta = dict(session_meta or {})
        self._buffer: list[TimedSample] = []
        self._lock = threading.Lock()
        self._fh = None
        self._last_written_ns = None
        bus.add_listener(self._on_sample)

    def _on_sample(self, sample: TimedSample):
        with self._lock:
            self._buffer.append(sample)

    def _ensure_started(self):
        if self._fh is not None:
            return
        self._fh = open(self.path, "w", encoding="utf-8", newline="\n")
        manifest = {
            "format": MAGIC,
            "epoch_unix_ns": time.time_ns(),
            "session": self._meta,
            "topics": [
                {
                    "name": d.name,
                    "schema": dict(d.schema),
                    "nominal_rate_hz": d.nominal_rate_hz,
                }
                for d in self._bus.topics()
            ],
        }
        self._fh.write(MAGIC + "\n")
        self._fh.write(json.dumps(manifest, separators=(",", ":")) + "\n")

    def start(self):
        self._ensure_started()

    def flush_until(self, watermark_ns: int):
        with self._lock:
            due = [s for s in self._buffer if s.t_ns < watermark_ns]
            self._buffer = [s for s in self._buffer if s.t_ns >= watermark_ns]
        due.sort(key=lambda s: (s.t_ns, s.topic, s.seq))
        self._ensure_started()
        if due:
            if self._last_written_ns is not None and due[0].t_ns < self._last_written_ns:
                raise CorruptBag(
                    f"flush watermark violated: sample at {due[0].t_ns} after "
                    f"writing up to {self._last_written_ns}"
                )
            self._fh.write("".join(_record_line(s) for s in due))
            self._last_written_ns = due[-1].t_ns
        self._fh.flush()

    def close(self):
        self.flush_until(2**63 - 1)
        self._fh.close()
        self._fh = None


def record(bus: Bus, path, session_meta: dict | None = None) -> BagWriter:
    """Attach a recorder to a bus; caller drives flush/close."""
    return BagWriter(path, bus, session_meta)


def read_manifest(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        magic = fh.readline().rstrip("\n")
        if magic != MAGIC:
            raise UnknownMagic(f"expected {MAGIC!r}, found {magic!r}")
        line = fh.readline()
        if not line:
            raise CorruptBag("missing manifest line")
        try:
            manifest = json.loads(line)
        except json.JSONDecodeError as e:
            raise CorruptBag(f"manifest is not valid JSON: {e}") from e
    if not isinstance(manifest.get("topics"), list):
        raise CorruptBag("manifest has no topic list")
    return manifest


def _canonicalize(data: dict, schema: dict) -> dict:
    out = {}
    for k, v in data.items():
        kind = schema.get(k, "").rstrip("?")
        if kind == "f64" and isinstance(v, int):
            v = float(v)
        elif kind == "vec" and isinstance(v, list):
            v = tuple(float(x) for x in v)
        out[k] = v
    return out


def iter_samples(path, strict: bool = False):
    """Yield (byte_offset, TimedSample) from a bag.

    A truncated or corrupt final line is skipped with a warning; corruption
    before the final line raises CorruptBag unless strict is False and the
    caller prefers the validator's itemized report.
    """
    manifest = read_manifest(path)
    schemas = {t["name"]: t.get("schema", {}) for t in manifest["topics"]}
    with open(path, "rb") as fh:
        fh.readline()
        fh.readline()
        offset = fh.tell()
        line = fh.readline()
        while line:
            next_offset = fh.tell()
            next_line = fh.readline()
            try:
                rec = json.loads(line)
                sample = TimedSample(
                    rec["topic"], rec["t"], rec["seq"],
                    _canonicalize(rec["data"], schemas.get(rec["topic"], {})),
                )
            except (json.JSONDecodeError, KeyError, TypeError) as e:
                if not next_line and not line.endswith(b"\n"):
                    warnings.warn(f"skipping truncated final record in {path}")
                    return
                if not next_line:
                    warnings.warn(f"skipping corrupt final record in {path}: {e}")
                    return
                if strict:
                    raise CorruptBag(f"corrupt record at byte {offset}: {e}") from e
                yield offset, None
                offset, line = next_offset, next_line
                continue
            yield offset, sample
            offset, line = next_offset, next_line


def load_samples(path) -> list[TimedSample]:
    return [s for _, s in iter_samples(path, strict=True) if s is not None]


def replay(path, bus: Bus | None = None, rate: float | str = "max",
           retain: bool = True) -> Bus:
    """Republish a bag onto a bus, preserving stamps and per-topic seqs.

    rate "max" skips pacing; a numeric rate scales inter-record wall-clock
    delays by 1/rate. Downstream extraction over a replayed bag matches the
    live run bit-exactly because records are reproduced verbatim.
    """
    if rate != "max" and not (isinstance(rate, (int, float)) and rate > 0):
        raise ValueError(f"rate must be positive or 'max': {rate!r}")
    manifest = read_manifest(path)
    if bus is None:
        bus = Bus(clock=ManualClock())
    for t in manifest["topics"]:
        bus.open_topic(
            TopicDescriptor(t["name"], t.get("schema", {}), t.get("nominal_rate_hz")),
            retain=retain,
        )
    start_wall = time.monotonic()
    t0 = None
    for _, sample in iter_samples(path, strict=True):
        if sample is None:
            continue
        if rate != "max":
            if t0 is None:
                t0 = sample.t_ns
            target = start_wall + (sample.t_ns - t0) / 1e9 / float(rate)
            delay = target - time.monotonic()
            if delay > 0:
                time.sleep(delay)
        bus.publish(sample.topic, sample.payload, t_ns=sample.t_ns)
    return bus


@dataclass
class ValidationIssue:
    kind: str
    topic: str
    message: str
    byte_offset: int | None = None

    def __str__(self):
        at = f" @byte {self.byte_offset}" if self.byte_offset is not None else ""
        return f"[{self.kind}] {self.topic}: {self.message}{at}"


@dataclass
class ValidationReport:
    issues: list = field(default_factory=list)
    records: int = 0

    @property
    def ok(self) -> bool:
        return not self.issues


def validate(path) -> ValidationReport:
    """Check magic, manifest/schema conformance, global t order, per-topic
    (t, seq) contiguity, and nominal-rate gaps (> 2x the nominal period)."""
    from .bus import canonical_payload

    report = ValidationReport()
    try:
        manifest = read_manifest(path)
    except (UnknownMagic, CorruptBag, OSError) as e:
        report.issues.append(ValidationIssue("header", "", str(e)))
        return report
    descs = {}
    for t in manifest["topics"]:
        try:
            descs[t["name"]] = TopicDescriptor(t["name"], t.get("schema", {}),
                                               t.get("nominal_rate_hz"))
        except Exception as e:
            report.issues.append(ValidationIssue("manifest", t.get("name", "?"), str(e)))
    last_global_t = None
    last_seq: dict[str, int] = {}
    last_t: dict[str, int] = {}
    for offset, sample in iter_samples(path, strict=False):
        if sample is None:
            report.issues.append(ValidationIssue("parse", "", "unparseable record", offset))
            continue
        report.records += 1
        desc = descs.get(sample.topic)
        if desc is None:
            report.issues.append(ValidationIssue("manifest", sample.topic,
                                                 "topic not in manifest", offset))
            continue
        try:
            canonical_payload(desc.schema, sample.payload)
        except Exception as e:
            report.issues.append(ValidationIssue("schema", sample.topic, str(e), offset))
        if last_global_t is not None and sample.t_ns < last_global_t:
            report.issues.append(ValidationIssue(
                "order", sample.topic,
                f"t={sample.t_ns} after t={last_global_t}", offset))
        last_global_t = max(last_global_t or sample.t_ns, sample.t_ns)
        expect = last_seq.get(sample.topic, -1) + 1
        if sample.seq != expect:
            report.issues.append(ValidationIssue(
                "seq", sample.topic,
                f"seq {sample.seq} where {expect} expected", offset))
        last_seq[sample.topic] = max(last_seq.get(sample.topic, -1), sample.seq)
        prev_t = last_t.get(sample.topic)
        if prev_t is not None:
            if sample.t_ns <= prev_t:
                report.issues.append(ValidationIssue(
                    "topic-order", sample.topic,
                    f"t={sample.t_ns} not after t={prev_t}", offset))
            rate = desc.nominal_rate_hz
            if rate and (sample.t_ns - prev_t) > 2e9 / rate:
                report.issues.append(ValidationIssue(
                    "gap", sample.topic,
                    f"{(sample.t_ns - prev_t) / 1e9:.3f} s gap exceeds 2x nominal period",
                    offset))
        last_t[sample.topic] = sample.t_ns
    return report


def body_bytes(path) -> bytes:
    """Record body of a bag (everything after magic and manifest lines)."""
    with open(path, "rb") as fh:
        fh.readline()
        fh.readline()
        return fh.read()
