"""Trace-driven simulation of inspection policies."""

from .episode import (POLICIES, EpisodeResult, Inspection, ScheduleInfeasible, SimSetup,
                      UncertaintyRow, plan_horizon, run_episode)
from .metrics import METRIC_COLUMNS, Metrics, evaluate
from .models import (DetectorModel, LatencyModel, MotionOracle, from_canvas, resource_model,
                     to_canvas)
from .trace import (TRACE_COLUMNS, Frame, GroundTruth, Trace, TraceError, drop_frames,
                    generate_trace, read_trace, write_trace)

__all__ = [
    "POLICIES", "EpisodeResult", "Inspection", "ScheduleInfeasible", "SimSetup",
    "UncertaintyRow", "plan_horizon", "run_episode", "METRIC_COLUMNS", "Metrics", "evaluate",
    "DetectorModel", "LatencyModel", "MotionOracle", "from_canvas", "resource_model",
    "to_canvas", "TRACE_COLUMNS", "Frame", "GroundTruth", "Trace", "TraceError",
    "drop_frames", "generate_trace", "read_trace", "write_trace",
]
