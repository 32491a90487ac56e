"""Shared JSON config: synthesis profile, session plan, policy, thresholds.

One human-editable file; field names mirror the dataclasses. Every key is
optional and falls back to the built-in defaults. MWPIPE_SEED in the
environment overrides any configured seed.
"""

from __future__ import annotations

import json
import os

from .errors import PlanInvalid
from .features import GazeThresholds
from .session import SessionPlan
from .sim import PhysicsParams, PolicyConfig
from .synth import GazeEvent, SynthProfile


def _gaze_event_from_dict(d: dict) -> GazeEvent:
    return GazeEvent(
        kind=d["kind"],
        start_s=float(d["start_s"]),
        duration_s=float(d["duration_s"]),
        x_deg=d.get("x_deg"),
        y_deg=d.get("y_deg"),
        amplitude_deg=d.get("amplitude_deg"),
        velocity_deg_s=d.get("velocity_deg_s"),
        direction_deg=float(d.get("direction_deg", 0.0)),
    )


def profile_from_dict(d: dict) -> SynthProfile:
    profile = SynthProfile()
    for key, value in d.items():
        if key == "scr_events":
            value = [(float(t), float(a)) for t, a in value]
        elif key == "gaze_script":
            value = [_gaze_event_from_dict(e) for e in value]
        if not hasattr(profile, key):
            raise PlanInvalid(f"unknown profile field {key!r}")
        setattr(profile, key, value)
    return profile


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def seed_override(seed: int) -> int:
    env = os.environ.get("MWPIPE_SEED")
    return int(env) if env else seed


def gaze_thresholds_from_config(cfg: dict) -> GazeThresholds | None:
    if "gaze_thresholds" not in cfg:
        return None
    return GazeThresholds(**cfg["gaze_thresholds"])


def plan_from_config(cfg: dict) -> SessionPlan:
    plan = SessionPlan()
    if "profile" in cfg:
        plan.profile = profile_from_dict(cfg["profile"])
    if "phase_profiles" in cfg:
        plan.phase_profiles = {
            name: profile_from_dict(d) for name, d in cfg["phase_profiles"].items()
        }
    if "policy" in cfg:
        plan.policy = PolicyConfig(**cfg["policy"])
    if "physics" in cfg:
        phys = dict(cfg["physics"])
        if "relay_pos_m" in phys:
            phys["relay_pos_m"] = tuple(phys["relay_pos_m"])
        plan.physics = PhysicsParams(**phys)
    plan.gaze_thresholds = gaze_thresholds_from_config(cfg)
    for key in ("seed", "baseline_s", "interrun_s", "run_timeout_s", "tlx_jitter"):
        if key in cfg:
            setattr(plan, key, cfg[key])
    if "run_order" in cfg:
        plan.run_order = tuple(cfg["run_order"])
    plan.seed = seed_override(plan.seed)
    plan.profile.seed = plan.seed
    return plan.validate()


def profile_from_config(cfg: dict) -> SynthProfile:
    profile = profile_from_dict(cfg.get("profile", cfg))
    profile.seed = seed_override(profile.seed)
    return profile.validate()
