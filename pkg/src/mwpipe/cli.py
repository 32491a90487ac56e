"""Command-line surface: synth, simulate, extract, replay, validate."""

from __future__ import annotations

import sys

import click

from .bag import BagWriter, read_manifest
from .bag import replay as bag_replay
from .bag import validate as bag_validate
from .bus import Bus, ManualClock, TopicDescriptor
from .config import load_config, plan_from_config, profile_from_config
from .export import extract_csv
from .session import run_session
from .synth import (
    default_gaze_script,
    default_scr_events,
    gen_drift_st,
    gen_eda,
    gen_gaze,
    gen_resp,
    gen_rr_series,
    render_cardiac,
)

from dataclasses import replace


@click.group()
def main():
    """Workload data pipeline: synthesis, simulation, extraction, replay."""


@main.command()
@click.option("--profile", "profile_path", type=click.Path(exists=True), default=None,
              help="JSON profile (defaults apply when omitted).")
@click.option("--duration", "duration_s", type=float, default=None,
              help="Override profile duration in seconds.")
@click.option("--out", "out_path", type=click.Path(), required=True)
def synth(profile_path, duration_s, out_path):
    """Generate all six raw biosignals into a bag."""
    profile = profile_from_config(load_config(profile_path))
    if duration_s is not None:
        profile.duration_s = duration_s
    dur = profile.duration_s
    profile.validate()

    bus = Bus(clock=ManualClock())
    topics = {
        "ecg": bus.open_topic(TopicDescriptor("bio.ecg", {"v": "f64"}, 252.0), retain=False),
        "ppg": bus.open_topic(TopicDescriptor("bio.ppg", {"v": "f64"}, 64.0), retain=False),
        "resp": bus.open_topic(TopicDescriptor("bio.resp", {"v": "f64"}, 1.008), retain=False),
        "eda": bus.open_topic(TopicDescriptor("bio.eda", {"v": "f64"}, 4.0), retain=False),
        "st": bus.open_topic(TopicDescriptor("bio.st", {"v": "f64"}, 4.0), retain=False),
        "gaze": bus.open_topic(
            TopicDescriptor("bio.gaze", {"x_deg": "f64", "y_deg": "f64", "d_mm": "f64"}, 120.0),
            retain=False),
    }
    writer = BagWriter(out_path, bus, session_meta={"kind": "synth", "seed": profile.seed})
    writer.start()
    rr = gen_rr_series(profile)
    waveforms = {
        "ecg": render_cardiac(rr, "ecg"),
        "ppg": render_cardiac(rr, "ppg", amplitude=profile.ppg_amplitude),
        "resp": gen_resp(profile.resp_rate_bpm, duration_s=dur),
        "eda": gen_eda(replace(
            profile, scr_events=profile.scr_events or default_scr_events(dur, profile.seed))),
        "st": gen_drift_st(profile),
        "gaze": gen_gaze(profile.gaze_script or default_gaze_script(dur, profile.seed),
                         profile.pupil_base_mm, duration_s=dur,
                         fixation_noise_deg=profile.fixation_noise_deg, seed=profile.seed),
    }
    n = 0
    for m, wf in waveforms.items():
        times = wf.times_ns()
        if m == "gaze":
            for t, (x, y, d) in zip(times, wf.values):
                bus.publish(topics[m], {"x_deg": float(x), "y_deg": float(y),
                                        "d_mm": float(d)}, t_ns=int(t))
                n += 1
        else:
            for t, v in zip(times, wf.values.tolist()):
                bus.publish(topics[m], {"v": v}, t_ns=int(t))
                n += 1
    writer.close()
    click.echo(f"wrote {n} samples across {len(waveforms)} topics to {out_path}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="JSON session config (defaults apply when omitted).")
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--tlx", type=click.Choice(["scripted", "interactive"]), default="scripted")
def simulate(config_path, out_path, tlx):
    """Run the full trial protocol and record everything into one bag."""
    plan = plan_from_config(load_config(config_path))
    prompt = None
    if tlx == "interactive":
        def prompt(scale):
            return click.prompt(f"TLX {scale} (0-100)", type=click.IntRange(0, 100))
    result = run_session(plan, out_path, tlx_interactive_prompt=prompt)
    for rec in result.run_records:
        click.echo(
            f"run {rec.run_index} [{rec.difficulty}] {rec.outcome.status} "
            f"in {rec.outcome.completion_time_s:.1f} s, "
            f"{rec.outcome.distance_m:.0f} m"
        )
    click.echo(f"bag: {result.bag_path}")


@main.command()
@click.option("--bag", "bag_path", type=click.Path(exists=True), required=True)
@click.option("--window", "window_s", type=float, default=30.0, show_default=True)
@click.option("--stride", "stride_s", type=float, default=1.0, show_default=True)
@click.option("--tolerance-ms", type=float, default=50.0, show_default=True,
              help="Telemetry alignment tolerance.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Shared config (picks up gaze_thresholds).")
@click.option("--out", "out_path", type=click.Path(), required=True)
def extract(bag_path, window_s, stride_s, tolerance_ms, config_path, out_path):
    """Derive the per-window feature table from a bag."""
    from .config import gaze_thresholds_from_config
    from .features import DEFAULT_THRESHOLDS

    thresholds = gaze_thresholds_from_config(load_config(config_path)) or DEFAULT_THRESHOLDS
    path = extract_csv(bag_path, out_path, window_s=window_s, stride_s=stride_s,
                       align_tolerance_ns=round(tolerance_ms * 1e6),
                       gaze_thresholds=thresholds)
    with open(path, "r", encoding="utf-8") as fh:
        rows = sum(1 for _ in fh) - 1
    click.echo(f"wrote {rows} rows to {path}")


@main.command()
@click.option("--bag", "bag_path", type=click.Path(exists=True), required=True)
@click.option("--rate", default="max", show_default=True,
              help="Playback speed multiplier, or 'max' for no pacing.")
@click.option("--bind", "bind_addr", default=None,
              help="HOST:PORT to serve the live-adapter wire protocol.")
def replay(bag_path, rate, bind_addr):
    """Republish a bag, paced or at full speed, locally or over a socket."""
    rate_val = "max" if rate == "max" else float(rate)
    if bind_addr is not None:
        from .wire import serve_bag

        host, _, port = bind_addr.partition(":")
        click.echo(f"serving {bag_path} on {host}:{port or 0} (rate={rate})")
        bound_host, bound_port, sent = serve_bag(
            bag_path, host or "127.0.0.1", int(port or 0), rate_val,
            ready=lambda h, p: click.echo(f"listening on {h}:{p}"))
        click.echo(f"sent {sent} records")
        return
    bus = bag_replay(bag_path, rate=rate_val, retain=False)
    total = sum(t.next_seq for t in bus._topics.values())
    click.echo(f"replayed {total} records across {len(bus.topics())} topics")


@main.command()
@click.option("--bag", "bag_path", type=click.Path(exists=True), required=True)
def validate(bag_path):
    """Check a bag's structure; exit nonzero on any error."""
    try:
        read_manifest(bag_path)
    except Exception as e:
        click.echo(f"invalid bag: {e}", err=True)
        sys.exit(1)
    report = bag_validate(bag_path)
    for issue in report.issues:
        click.echo(str(issue), err=True)
    click.echo(f"{report.records} records, {len(report.issues)} issues")
    sys.exit(0 if report.ok else 1)


if __name__ == "__main__":
    main()
