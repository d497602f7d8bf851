"""Threshold-counting baseline over bucket events.

The rule the state machine replaced: accumulate vertical and horizontal
bucket events, count a workload when both counters reach their thresholds,
and reset the vertical counter every time a horizontal bucket shows up
(vertical buckets are far more frequent, so horizontal ones anchor the
cycle).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .events import Event, EventOccurrence


@dataclass(frozen=True)
class HeuristicConfig:
    vertical_threshold: int
    horizontal_threshold: int
    preset: str = "custom"

    def __post_init__(self) -> None:
        if self.vertical_threshold < 1 or self.horizontal_threshold < 1:
            raise ValueError(
                f"thresholds must be >= 1, got V={self.vertical_threshold} "
                f"H={self.horizontal_threshold}"
            )


# Artifact-chosen preset values (reports always print them). The loose preset
# counts on the first horizontal block after two vertical sightings; the
# strict preset demands a long vertical run and so skips degraded cycles.
LOOSE = HeuristicConfig(vertical_threshold=2, horizontal_threshold=1, preset="loose")
STRICT = HeuristicConfig(vertical_threshold=8, horizontal_threshold=1, preset="strict")
PRESETS = {"loose": LOOSE, "strict": STRICT}


@dataclass(frozen=True)
class HeuristicCounters:
    vertical_count: int = 0
    horizontal_count: int = 0
    workload_count: int = 0


def heuristic_step(
    counters: HeuristicCounters, event: Event, cfg: HeuristicConfig
) -> tuple[HeuristicCounters, bool]:
    """Advance the counters by one event.

    A vertical bucket increments the vertical counter. A horizontal bucket
    increments the horizontal counter, then checks for a completed workload
    (vertical count at threshold before its reset, horizontal count at
    threshold), and finally resets the vertical counter either way. Counting
    resets both bucket counters. Other events change nothing.
    """
    if event is Event.VERTICAL_BUCKET:
        return (
            HeuristicCounters(
                counters.vertical_count + 1,
                counters.horizontal_count,
                counters.workload_count,
            ),
            False,
        )
    if event is not Event.HORIZONTAL_BUCKET:
        return counters, False

    horizontal = counters.horizontal_count + 1
    if (
        counters.vertical_count >= cfg.vertical_threshold
        and horizontal >= cfg.horizontal_threshold
    ):
        return HeuristicCounters(0, 0, counters.workload_count + 1), True
    return HeuristicCounters(0, horizontal, counters.workload_count), False


def run_heuristic(events: Iterable[Event], cfg: HeuristicConfig) -> HeuristicCounters:
    """Fold heuristic_step over the stream from zeroed counters."""
    counters = HeuristicCounters()
    for event in events:
        counters, _ = heuristic_step(counters, event, cfg)
    return counters


def iter_completions(
    occurrences: Iterable[EventOccurrence], cfg: HeuristicConfig
) -> Iterator[EventOccurrence]:
    """Yield the occurrences at which a workload was counted (always
    horizontal-bucket events)."""
    counters = HeuristicCounters()
    for occ in occurrences:
        counters, counted = heuristic_step(counters, occ.event, cfg)
        if counted:
            yield occ
