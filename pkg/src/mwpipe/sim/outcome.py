"""Run evaluation: failure rules, completion, and alert-response stats."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import IncompleteTrace
from .difficulty import DifficultyParams
from .operator import PolicyConfig, ScriptedOperator
from .rover import DT_S, NS_PER_S, OperatorAction, PhysicsParams, DEFAULT_PHYSICS, RoverSim, RoverState


@dataclass
class TickRecord:
    state: RoverState
    action: OperatorAction
    events: list = field(default_factory=list)


@dataclass
class RunOutcome:
    status: str                  # completed | failed_battery | failed_o2 | failed_co2 | aborted
    completion_time_s: float
    distance_m: float
    alert_response_stats: dict


def _comm_stats(trace) -> dict:
    latencies = []
    prompts = 0
    reprompts = 0
    for rec in trace:
        for ev in rec.events:
            if ev["event"] == "request" and ev["reprompts"] == 0:
                prompts += 1
            elif ev["event"] == "request":
                reprompts += 1
            elif ev["event"] == "response":
                latencies.append(ev["latency_s"])
    unanswered = 1 if trace and trace[-1].state.pending_prompt is not None else 0
    return {
        "comm_prompt_count": prompts,
        "comm_mean_latency_s": sum(latencies) / len(latencies) if latencies else None,
        "comm_miss_count": reprompts + unanswered,
    }


def _radar_stats(trace) -> dict:
    episodes = 0
    recovery = []
    below_since = None
    for rec in trace:
        low = rec.state.radar_state < 4
        if low and below_since is None:
            below_since = rec.state.t_ns
            episodes += 1
        elif not low and below_since is not None:
            recovery.append((rec.state.t_ns - below_since) / NS_PER_S)
            below_since = None
    return {
        "radar_drop_count": episodes,
        "radar_mean_recovery_s": sum(recovery) / len(recovery) if recovery else None,
    }


def evaluate_run(trace: list, goal_radius_m: float = DEFAULT_PHYSICS.goal_radius_m,
                 goal_distance_fn=None) -> RunOutcome:
    """Apply the failure/completion rules to a complete per-tick trace."""
    if not trace:
        raise IncompleteTrace("empty trace")
    status = "aborted"
    end_index = len(trace) - 1
    for i, rec in enumerate(trace):
        s = rec.state
        if s.battery_pct <= 0.0:
            status, end_index = "failed_battery", i
            break
        if s.o2_pct <= 0.0:
            status, end_index = "failed_o2", i
            break
        if s.co2_pct >= DEFAULT_PHYSICS.co2_fail_pct:
            status, end_index = "failed_co2", i
            break
        if rec.action.drop_marker and goal_distance_fn is not None \
                and goal_distance_fn(s) <= goal_radius_m:
            status, end_index = "completed", i
            break
    last = trace[end_index].state
    stats = _comm_stats(trace[: end_index + 1])
    stats.update(_radar_stats(trace[: end_index + 1]))
    return RunOutcome(
        status=status,
        completion_time_s=(last.t_ns - trace[0].state.t_ns) / NS_PER_S + DT_S,
        distance_m=last.distance_traveled_m,
        alert_response_stats=stats,
    )


def run_closed_loop(seed: int, difficulty: DifficultyParams,
                    policy: PolicyConfig = PolicyConfig(),
                    breath_rate_bpm: float = 15.0,
                    timeout_s: float = 720.0,
                    physics: PhysicsParams = DEFAULT_PHYSICS,
                    on_tick=None):
    """Run one full closed-loop trial; returns (trace, outcome).

    on_tick(state, action, events) is called after every step (telemetry
    hook for the session runner).
    """
    sim = RoverSim(seed, difficulty, physics)
    op = ScriptedOperator(policy, seed)
    trace = []
    max_ticks = int(timeout_s / DT_S)
    for _ in range(max_ticks):
        action = op.act(sim, sim.state)
        state, events = sim.step(action, breath_rate_bpm)
        rec = TickRecord(state, action, events)
        trace.append(rec)
        if on_tick is not None:
            on_tick(state, action, events)
        if state.battery_pct <= 0.0 or state.o2_pct <= 0.0 \
                or state.co2_pct >= physics.co2_fail_pct:
            break
        if action.drop_marker and sim.distance_to_goal(state) <= physics.goal_radius_m:
            break
    outcome = evaluate_run(trace, physics.goal_radius_m, sim.distance_to_goal)
    return trace, outcome
