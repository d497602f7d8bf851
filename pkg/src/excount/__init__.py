"""Excavator workload counting from object-detection streams.

The pipeline: parse wire-format detections, filter and stride them, identify
business events (bucket poses, truck presence, approach/departure trends),
and fold the events through a rectifying state machine that counts completed
workloads. Heuristic threshold counters, an evaluation harness, and a
scenario simulator round out the toolkit.
"""
from __future__ import annotations

from .config import ConfigError, PipelineConfig, load_config, resolve_table
from .evaluation import (
    AggregateReport,
    EvalReport,
    MatchConfig,
    WorkloadRecord,
    aggregate_reports,
    compute_metrics,
    evaluate,
    f1_score,
    load_truth,
    match_workloads,
)
from .events import (
    CoOccurrenceTracker,
    Event,
    EventOccurrence,
    EventWindowConfig,
    identify_events,
    step_events,
)
from .fsm import (
    BusinessState,
    FsmRun,
    StepResult,
    TraceRecord,
    TransitionTable,
    TransitionTableError,
    default_table,
    load_transition_table,
    parse_transition_table,
    run_events,
    run_fsm,
    step,
)
from .heuristic import (
    LOOSE,
    PRESETS,
    STRICT,
    HeuristicConfig,
    HeuristicCounters,
    heuristic_step,
    run_heuristic,
)
from .pipeline import (
    CountResult,
    count_stream,
    count_workloads,
    frames_to_events,
    heuristic_workloads,
    prepare_frames,
)
from .simulator import (
    ZERO_NOISE,
    CountingMethod,
    ExperimentResult,
    NoiseModel,
    ScenarioScript,
    WorkCycle,
    generate_stream,
    load_scenario_suite,
    run_experiment,
)
from .stream import (
    BoundingBox,
    Detection,
    DetectionClass,
    FilterConfig,
    FrameDetections,
    StreamFormatError,
    parse_detection_stream,
    serialize_detection_stream,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateReport",
    "BoundingBox",
    "BusinessState",
    "CoOccurrenceTracker",
    "ConfigError",
    "CountResult",
    "CountingMethod",
    "Detection",
    "DetectionClass",
    "EvalReport",
    "Event",
    "EventOccurrence",
    "EventWindowConfig",
    "ExperimentResult",
    "FilterConfig",
    "FrameDetections",
    "FsmRun",
    "HeuristicConfig",
    "HeuristicCounters",
    "LOOSE",
    "MatchConfig",
    "NoiseModel",
    "PRESETS",
    "PipelineConfig",
    "STRICT",
    "ScenarioScript",
    "StepResult",
    "StreamFormatError",
    "TraceRecord",
    "TransitionTable",
    "TransitionTableError",
    "WorkCycle",
    "WorkloadRecord",
    "ZERO_NOISE",
    "aggregate_reports",
    "compute_metrics",
    "count_stream",
    "count_workloads",
    "default_table",
    "evaluate",
    "f1_score",
    "frames_to_events",
    "generate_stream",
    "heuristic_step",
    "heuristic_workloads",
    "identify_events",
    "load_config",
    "load_scenario_suite",
    "load_transition_table",
    "load_truth",
    "match_workloads",
    "parse_detection_stream",
    "parse_transition_table",
    "prepare_frames",
    "resolve_table",
    "run_events",
    "run_experiment",
    "run_fsm",
    "run_heuristic",
    "serialize_detection_stream",
    "step",
    "step_events",
]
