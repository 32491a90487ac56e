"""Session orchestration: baseline, four runs at alternating difficulty with
free-play gaps, TLX capture after each run, everything on one bus and into
one bag.

The session clock is manual and tick-driven (0.1 s). Physiology streams run
through every phase; the task information systems (prompts, radar drift,
resource drain) are active only during runs. Identical plan and seed yield
a byte-identical bag body.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .bag import BagWriter
from .bus import Bus, ManualClock, NS_PER_S, TopicDescriptor
from .errors import PlanInvalid, ScaleOutOfRange
from .features import FEATURE_CATALOG, FeaturePipeline
from .sim import PolicyConfig, RoverSim, ScriptedOperator, evaluate_run, preset
from .sim.operator import WanderOperator
from .sim.outcome import TickRecord
from .synth import (
    SynthProfile,
    default_gaze_script,
    default_scr_events,
    gen_drift_st,
    gen_eda,
    gen_gaze,
    gen_resp,
    gen_rr_series,
    render_cardiac,
)

TICK_NS = 100_000_000  # 0.1 s

TLX_SCALES = ("mental", "physical", "temporal", "performance", "effort", "frustration")

TLX_BASE = {
    "low": {"mental": 35, "physical": 25, "temporal": 30,
            "performance": 70, "effort": 35, "frustration": 20},
    "high": {"mental": 70, "physical": 40, "temporal": 65,
             "performance": 55, "effort": 70, "frustration": 45},
}
TLX_FAILURE_ADJUST = {"performance": -25, "frustration": +20}


@dataclass(frozen=True)
class TLXResponse:
    run_index: int
    mental: int
    physical: int
    temporal: int
    performance: int
    effort: int
    frustration: int

    def __post_init__(self):
        for name in TLX_SCALES:
            v = getattr(self, name)
            if not isinstance(v, int) or not 0 <= v <= 100:
                raise ScaleOutOfRange(f"TLX {name}={v} outside [0, 100]")

    def as_payload(self) -> dict:
        out = {"run_index": self.run_index}
        out.update({name: getattr(self, name) for name in TLX_SCALES})
        return out


@dataclass
class RunRecord:
    run_index: int
    difficulty: str
    outcome: object
    tlx: TLXResponse | None
    t_start_ns: int
    t_end_ns: int


def scripted_tlx(run_index: int, difficulty: str, status: str, seed: int,
                 jitter: int = 8) -> TLXResponse:
    """Difficulty-monotone synthetic TLX with seeded jitter.

    The base-score gap between difficulties (>= 2x jitter) keeps high-run
    demand scores at or above low-run scores for any seed.
    """
    rng = np.random.default_rng([seed, 20 + run_index])
    values = {}
    for name in TLX_SCALES:
        v = TLX_BASE[difficulty][name]
        if status != "completed" and name in TLX_FAILURE_ADJUST:
            v += TLX_FAILURE_ADJUST[name]
        v += int(rng.integers(-jitter, jitter + 1))
        values[name] = int(min(max(v, 0), 100))
    return TLXResponse(run_index=run_index, **values)


def collect_tlx(run_index: int, difficulty: str, status: str, seed: int,
                jitter: int = 8, interactive_prompt=None) -> TLXResponse:
    """Scripted responder by default; interactive entry via the CLI hook."""
    if interactive_prompt is not None:
        values = {name: int(interactive_prompt(name)) for name in TLX_SCALES}
        return TLXResponse(run_index=run_index, **values)
    return scripted_tlx(run_index, difficulty, status, seed, jitter)


@dataclass
class SessionPlan:
    """Trial protocol description.

    phase_profiles optionally overrides the synthesis profile per phase kind
    ("baseline" / "run" / "freeplay"); gaze_thresholds and physics flow into
    feature extraction and the simulator from the shared config file.
    """

    seed: int = 0
    baseline_s: float = 300.0
    interrun_s: float = 180.0
    run_order: tuple = ("low", "high", "low", "high")
    run_timeout_s: float = 720.0
    profile: SynthProfile = field(default_factory=SynthProfile)
    phase_profiles: dict = field(default_factory=dict)
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    tlx_jitter: int = 8
    gaze_thresholds: object = None
    physics: object = None

    def validate(self):
        order = tuple(self.run_order)
        if len(order) != 4 or sorted(order) != ["high", "high", "low", "low"]:
            raise PlanInvalid(f"run_order needs two low and two high: {order}")
        if any(a == b for a, b in zip(order, order[1:])):
            raise PlanInvalid(f"run_order must alternate difficulty: {order}")
        if self.baseline_s <= 0 or self.interrun_s <= 0 or self.run_timeout_s <= 0:
            raise PlanInvalid("phase durations must be positive")
        unknown = set(self.phase_profiles) - {"baseline", "run", "freeplay"}
        if unknown:
            raise PlanInvalid(f"unknown phase_profiles keys: {sorted(unknown)}")
        return self

    def profile_for(self, phase_name: str) -> SynthProfile:
        return self.phase_profiles.get(phase_name, self.profile)


@dataclass
class SessionResult:
    bag_path: str
    run_records: list
    phases: list  # (name, start_ns, end_ns)


def _feature_schema(modality: str) -> dict:
    schema = {name: "f64?" for name in FEATURE_CATALOG[modality]}
    schema["quality"] = "f64"
    return schema


def _open_topics(bus: Bus):
    topics = [
        ("bio.ecg", {"v": "f64"}, 252.0),
        ("bio.ppg", {"v": "f64"}, 64.0),
        ("bio.resp", {"v": "f64"}, 1.008),
        ("bio.eda", {"v": "f64"}, 4.0),
        ("bio.st", {"v": "f64"}, 4.0),
        ("bio.gaze", {"x_deg": "f64", "y_deg": "f64", "d_mm": "f64"}, 120.0),
        ("sim.rover", {"x_m": "f64", "y_m": "f64", "heading_deg": "f64",
                       "speed_m_s": "f64", "angular_vel_deg_s": "f64",
                       "battery_pct": "f64", "motor_temp_c": "f64",
                       "stalled": "bool", "overdrive_s": "f64",
                       "distance_m": "f64"}, 10.0),
        ("sim.resources", {"o2_pct": "f64", "co2_pct": "f64"}, 10.0),
        ("sim.radar", {"state": "i64", "dish_heading_deg": "f64",
                       "flash_hz": "f64"}, 10.0),
        ("sim.comms", {"request": "bool", "response": "bool", "kind": "str",
                       "target": "str", "channel": "str", "latency_s": "f64?"}, None),
        ("sim.meta", {"phase": "str", "run_index": "i64", "difficulty": "str",
                      "elapsed_s": "f64"}, 1.0),
        ("survey.tlx", {"run_index": "i64", "mental": "i64", "physical": "i64",
                        "temporal": "i64", "performance": "i64", "effort": "i64",
                        "frustration": "i64"}, None),
    ]
    for m in FEATURE_CATALOG:
        topics.append((f"feat.{m}", _feature_schema(m), None))
    return {name: bus.open_topic(TopicDescriptor(name, schema, rate), retain=False)
            for name, schema, rate in topics}


CARDIAC_FADE_S = 0.08


def _taper_edges(values: np.ndarray, fs: float, dc: float,
                 fade_s: float = CARDIAC_FADE_S) -> np.ndarray:
    """Raised-cosine fade to the channel's DC level at both array ends,
    suppressing step discontinuities where consecutive phases are stitched."""
    n_fade = int(fade_s * fs)
    if n_fade < 1 or len(values) < 2 * n_fade:
        return values
    out = values.copy()
    ramp = 0.5 * (1.0 - np.cos(np.pi * np.arange(n_fade) / n_fade))
    out[:n_fade] = dc + (out[:n_fade] - dc) * ramp
    out[-n_fade:] = dc + (out[-n_fade:] - dc) * ramp[::-1]
    return out


@dataclass
class _StitchState:
    """Continuity carried from one phase's streams into the next."""

    resp_phase_rad: float = 0.0
    gaze_x_deg: float = -4.0


class _PhaseStreams:
    """Pregenerated physiology for one phase, published tick by tick.

    Cardiac channels are tapered to their DC at the stitch; respiration
    continues the previous phase's cycle; the gaze script opens where the
    previous phase left off.
    """

    def __init__(self, profile: SynthProfile, duration_s: float, phase_seed: int,
                 t0_ns: int, stitch: _StitchState):
        p = replace(profile, seed=phase_seed, duration_s=duration_s)
        rr = gen_rr_series(p)
        ecg = render_cardiac(rr, "ecg")
        ppg = render_cardiac(rr, "ppg", amplitude=p.ppg_amplitude)
        ecg.values = _taper_edges(ecg.values, ecg.fs_hz, 0.0)
        ppg.values = _taper_edges(ppg.values, ppg.fs_hz, -0.3 * p.ppg_amplitude)
        gaze_script = p.gaze_script or default_gaze_script(
            duration_s, phase_seed, start_x_deg=stitch.gaze_x_deg)
        waveforms = {
            "ecg": ecg,
            "ppg": ppg,
            "resp": gen_resp(p.resp_rate_bpm, duration_s=duration_s,
                             phase0_rad=stitch.resp_phase_rad),
            "eda": gen_eda(replace(
                p, scr_events=p.scr_events or default_scr_events(duration_s, phase_seed))),
            "st": gen_drift_st(p),
            "gaze": gen_gaze(gaze_script, p.pupil_base_mm, duration_s=duration_s,
                             fixation_noise_deg=p.fixation_noise_deg, seed=phase_seed),
        }
        self.t0_ns = t0_ns
        self.breath_rate_bpm = p.resp_rate_bpm
        self.streams = {}
        for m, wf in waveforms.items():
            times = wf.times_ns() + t0_ns
            feed_vals = np.asarray(wf.values, dtype=float)
            if m == "gaze":
                scalars = [tuple(map(float, row)) for row in wf.values]
            else:
                scalars = wf.values.tolist()
            self.streams[m] = {"times": times, "scalars": scalars,
                               "feed": feed_vals, "ptr": 0}
        self._gaze_wf = waveforms["gaze"]
        self._resp_rate = p.resp_rate_bpm

    def carry_out(self, actual_duration_s: float, stitch: _StitchState) -> _StitchState:
        """Continuity values at the point this phase actually ended."""
        resp_phase = (stitch.resp_phase_rad
                      + 2.0 * math.pi * (self._resp_rate / 60.0) * actual_duration_s)
        gaze = self.streams["gaze"]
        idx = min(max(gaze["ptr"] - 1, 0), len(gaze["scalars"]) - 1)
        gaze_x = gaze["scalars"][idx][0] if gaze["scalars"] else stitch.gaze_x_deg
        return _StitchState(resp_phase_rad=resp_phase % (2.0 * math.pi), gaze_x_deg=gaze_x)

    def publish_until(self, bus, topics, pipeline, t_limit_ns: int):
        """Publish and feed every sample with t < t_limit_ns."""
        for m, s in self.streams.items():
            times = s["times"]
            i = s["ptr"]
            j = int(np.searchsorted(times, t_limit_ns, side="left"))
            if j <= i:
                continue
            topic = topics[f"bio.{m}"]
            scalars = s["scalars"]
            if m == "gaze":
                for k in range(i, j):
                    x, y, d = scalars[k]
                    bus.publish(topic, {"x_deg": x, "y_deg": y, "d_mm": d},
                                t_ns=int(times[k]))
            else:
                for k in range(i, j):
                    bus.publish(topic, {"v": scalars[k]}, t_ns=int(times[k]))
            pipeline.feed(m, times[i:j], s["feed"][i:j])
            s["ptr"] = j


def _publish_feature_rows(bus, topics, rows):
    for row in rows:
        payload = dict(row.values)
        payload["quality"] = row.quality
        bus.publish(topics[f"feat.{row.modality}"], payload, t_ns=row.t_end_ns)


def run_session(plan: SessionPlan, out_path, tlx_interactive_prompt=None) -> SessionResult:
    plan.validate()
    bus = Bus(clock=ManualClock())
    topics = _open_topics(bus)
    writer = BagWriter(out_path, bus, session_meta={
        "seed": plan.seed,
        "run_order": list(plan.run_order),
        "baseline_s": plan.baseline_s,
        "interrun_s": plan.interrun_s,
        "run_timeout_s": plan.run_timeout_s,
    })
    writer.start()
    if plan.gaze_thresholds is not None:
        pipeline = FeaturePipeline(t0_ns=0, gaze_thresholds=plan.gaze_thresholds)
    else:
        pipeline = FeaturePipeline(t0_ns=0)

    phases = [("baseline", None)]
    for i, level in enumerate(plan.run_order):
        phases.append(("run", i))
        if i < len(plan.run_order) - 1:
            phases.append(("freeplay", i))

    run_records: list[RunRecord] = []
    phase_spans: list[tuple] = []
    t_ns = 0
    last_meta_ns = -1
    stitch = _StitchState()

    def publish_meta(t, phase_name, run_index, difficulty):
        nonlocal last_meta_ns
        if t == last_meta_ns:
            return
        bus.publish(topics["sim.meta"], {
            "phase": phase_name, "run_index": run_index,
            "difficulty": difficulty, "elapsed_s": t / NS_PER_S,
        }, t_ns=t)
        last_meta_ns = t

    try:
        for phase_index, (phase_name, run_index) in enumerate(phases):
            is_run = phase_name == "run"
            level = plan.run_order[run_index] if is_run else ""
            duration_s = {
                "baseline": plan.baseline_s,
                "freeplay": plan.interrun_s,
                "run": plan.run_timeout_s,
            }[phase_name]
            phase_seed = plan.seed * 100 + phase_index
            phase_start = t_ns
            streams = _PhaseStreams(plan.profile_for(phase_name), duration_s,
                                    phase_seed, phase_start, stitch)
            sim_kwargs = {} if plan.physics is None else {"physics": plan.physics}
            if is_run:
                sim = RoverSim(plan.seed * 100 + 50 + run_index, preset(level),
                               task_active=True, **sim_kwargs)
                operator = ScriptedOperator(plan.policy, phase_seed)
            else:
                sim = RoverSim(phase_seed, preset("low"), task_active=False, **sim_kwargs)
                operator = WanderOperator(phase_seed)

            publish_meta(phase_start, phase_name, run_index if run_index is not None else -1, level)
            trace: list[TickRecord] = []
            n_ticks = round(duration_s / 0.1)
            for k in range(n_ticks):
                tick_t = phase_start + k * TICK_NS
                tick_end = tick_t + TICK_NS
                if tick_t % NS_PER_S == 0 and tick_t != phase_start:
                    publish_meta(tick_t, phase_name,
                                 run_index if run_index is not None else -1, level)
                streams.publish_until(bus, topics, pipeline, tick_end)
                action = operator.act(sim, sim.state)
                state, events = sim.step(action, streams.breath_rate_bpm)
                bus.publish(topics["sim.rover"], {
                    "x_m": state.x_m, "y_m": state.y_m,
                    "heading_deg": state.heading_deg, "speed_m_s": state.speed_m_s,
                    "angular_vel_deg_s": state.angular_vel_deg_s,
                    "battery_pct": state.battery_pct,
                    "motor_temp_c": state.motor_temp_c, "stalled": state.stalled,
                    "overdrive_s": state.overdrive_remaining_s,
                    "distance_m": state.distance_traveled_m,
                }, t_ns=tick_t)
                bus.publish(topics["sim.resources"],
                            {"o2_pct": state.o2_pct, "co2_pct": state.co2_pct}, t_ns=tick_t)
                bus.publish(topics["sim.radar"], {
                    "state": state.radar_state,
                    "dish_heading_deg": state.radar_heading_deg,
                    "flash_hz": state.flash_hz,
                }, t_ns=tick_t)
                if events:
                    payload = {
                        "request": any(e["event"] == "request" for e in events),
                        "response": any(e["event"] == "response" for e in events),
                        "kind": events[-1].get("kind", ""),
                        "target": events[-1].get("target", ""),
                        "channel": state.comm_channel,
                    }
                    latencies = [e["latency_s"] for e in events if "latency_s" in e]
                    if latencies:
                        payload["latency_s"] = latencies[-1]
                    bus.publish(topics["sim.comms"], payload, t_ns=tick_t)
                bus.clock.advance_to(tick_end)
                _publish_feature_rows(bus, topics, pipeline.advance_to(tick_end))
                if is_run:
                    trace.append(TickRecord(state, action, events))
                    done = (
                        state.battery_pct <= 0.0 or state.o2_pct <= 0.0
                        or state.co2_pct >= sim.physics.co2_fail_pct
                        or (action.drop_marker
                            and sim.distance_to_goal(state) <= sim.physics.goal_radius_m)
                    )
                    if done:
                        t_ns = tick_end
                        break
                t_ns = tick_end
            phase_end = t_ns
            if is_run:
                outcome = evaluate_run(trace, sim.physics.goal_radius_m, sim.distance_to_goal)
                tlx = collect_tlx(run_index, level, outcome.status, plan.seed,
                                  plan.tlx_jitter, tlx_interactive_prompt)
                bus.publish(topics["survey.tlx"], tlx.as_payload(), t_ns=phase_end)
                run_records.append(RunRecord(run_index, level, outcome, tlx,
                                             phase_start, phase_end))
            if phase_name == "baseline":
                pipeline.freeze_baseline_from_observations()
            stitch = streams.carry_out((phase_end - phase_start) / NS_PER_S, stitch)
            phase_spans.append((phase_name, phase_start, phase_end))
            writer.flush_until(phase_end)
        publish_meta(t_ns, "end", -1, "")
        writer.flush_until(t_ns + 1)
    finally:
        writer.close()
    return SessionResult(str(out_path), run_records, phase_spans)
