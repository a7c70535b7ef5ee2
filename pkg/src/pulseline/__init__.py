"""Wearable vitals telemetry backend.

Turns simulated low-cost sensor bursts into plain-language guidance through
a tiered model pipeline, and ships the evaluation harness that compares the
model-based estimator against a conventional signal-processing baseline.
"""

__version__ = "0.1.0"
