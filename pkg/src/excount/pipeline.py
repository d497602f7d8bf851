"""End-to-end wiring: raw frames -> filtered frames -> events -> counts.

The stages are deliberately small and reusable; everything here composes
functions from stream, events, fsm, and heuristic without adding policy of
its own. Frame preparation order matters: gaps are densified first so the
stride picks every k-th *position* of the original recording, then
confidence filtering and per-class selection run on the surviving frames.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .events import EventOccurrence, EventWindowConfig, identify_events
from .evaluation import WorkloadRecord
from .fsm import FsmRun, TransitionTable, default_table, run_fsm
from .heuristic import HeuristicConfig, iter_completions
from .stream import (
    FilterConfig,
    FrameDetections,
    apply_stride,
    densify_frames,
    filter_by_confidence,
    top1_per_class,
)


def prepare_frames(
    frames: Iterable[FrameDetections], cfg: FilterConfig = FilterConfig()
) -> Iterator[FrameDetections]:
    """Densify, stride, threshold, and reduce to one detection per class."""
    kept = apply_stride(densify_frames(frames), cfg.stride)
    for frame in kept:
        frame = filter_by_confidence(frame, cfg.confidence_threshold)
        if cfg.one_per_class:
            frame = top1_per_class(frame)
        yield frame


def frames_to_events(
    frames: Iterable[FrameDetections],
    filter_cfg: FilterConfig = FilterConfig(),
    window_cfg: EventWindowConfig = EventWindowConfig(),
) -> Iterator[EventOccurrence]:
    """Full front half of the pipeline: raw frames to event occurrences."""
    return identify_events(prepare_frames(frames, filter_cfg), window_cfg)


@dataclass(frozen=True)
class CountResult:
    """A counting run's outcome: the machine run plus completion records."""

    run: FsmRun
    workloads: tuple[WorkloadRecord, ...]

    @property
    def count(self) -> int:
        return self.run.workload_count


def count_workloads(
    occurrences: Iterable[EventOccurrence], table: TransitionTable | None = None
) -> CountResult:
    run = run_fsm(occurrences, table if table is not None else default_table())
    workloads = tuple(
        WorkloadRecord(record.timestamp, source="fsm")
        for record in run.trace
        if record.counted
    )
    return CountResult(run, workloads)


def count_stream(
    frames: Iterable[FrameDetections],
    table: TransitionTable | None = None,
    filter_cfg: FilterConfig = FilterConfig(),
    window_cfg: EventWindowConfig = EventWindowConfig(),
) -> CountResult:
    """Raw frames in, workload count out. The one-call entry point."""
    return count_workloads(frames_to_events(frames, filter_cfg, window_cfg), table)


def heuristic_workloads(
    occurrences: Iterable[EventOccurrence], cfg: HeuristicConfig
) -> tuple[WorkloadRecord, ...]:
    return tuple(
        WorkloadRecord(occ.timestamp, source="heuristic")
        for occ in iter_completions(occurrences, cfg)
    )
