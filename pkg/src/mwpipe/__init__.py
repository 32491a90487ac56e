"""Multimodal workload data pipeline.

Time-synchronized pub/sub bus, seeded biosignal synthesis, rolling-window
biofeature extraction, a lunar-rover task simulator, a trial-protocol session
runner, and replayable bag persistence.
"""

__version__ = "0.1.0"
