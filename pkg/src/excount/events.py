"""Business-event identification over the processed frame stream.

Three simple events are per-frame presence checks; two complex events watch
the trend of the truck-to-bucket distance across recent co-occurrence frames
(frames showing both a truck and a bucket) and the truck's disappearance.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Iterator

from .stream import (
    BUCKET_CLASSES,
    DetectionClass,
    FrameDetections,
    bbox_center_distance,
    largest,
)


class Event(Enum):
    """The five business events. Values are the wire codes used in transition
    tables and trace files."""

    VERTICAL_BUCKET = "e0"
    HORIZONTAL_BUCKET = "e1"
    TRUCK_FOUND = "e2"
    BUCKET_APPROACHING = "e3"
    TRUCK_AWAY = "e4"


# Canonical within-frame application order (simple before complex). Runs are
# only deterministic if simultaneous events are applied in a fixed order.
_EVENT_ORDER = {event: position for position, event in enumerate(Event)}


def ordered(events: Iterable[Event]) -> list[Event]:
    return sorted(events, key=_EVENT_ORDER.__getitem__)


@dataclass(frozen=True)
class EventOccurrence:
    event: Event
    frame_index: int
    timestamp: float


@dataclass(frozen=True)
class EventWindowConfig:
    """Complex-event tuning.

    min_cooccurrences: samples needed before a distance trend can fire, and
        the length of the strictly-monotone run that is checked ("more than
        twice" reads as at least 3).
    window_length: ring-buffer capacity of co-occurrence samples.
    absence_gap: processed frames without a truck, after at least one
        sighting, before TRUCK_AWAY fires on absence.
    reset_window_after_event: clear the distance buffer once a complex event
        fires. Off by default; the buffer keeps rolling.
    """

    min_cooccurrences: int = 3
    window_length: int = 5
    absence_gap: int = 1
    reset_window_after_event: bool = False

    def __post_init__(self) -> None:
        if self.min_cooccurrences < 2:
            raise ValueError(f"min_cooccurrences must be >= 2, got {self.min_cooccurrences}")
        if self.window_length < self.min_cooccurrences:
            raise ValueError(
                f"window_length {self.window_length} smaller than "
                f"min_cooccurrences {self.min_cooccurrences}"
            )
        if self.absence_gap < 1:
            raise ValueError(f"absence_gap must be >= 1, got {self.absence_gap}")


@dataclass(frozen=True)
class CoOccurrenceTracker:
    """Rolling state for the distance-trend and truck-absence events.

    samples holds (frame_index, center distance) for the most recent
    co-occurrence frames, oldest first. truck_sightings counts frames with a
    truck since the last absence-triggered TRUCK_AWAY; frames_since_truck
    counts processed frames since a truck was last visible.
    """

    samples: tuple[tuple[int, float], ...] = ()
    last_truck_frame: int | None = None
    truck_sightings: int = 0
    frames_since_truck: int = 0
    last_frame: int | None = None


def identify_simple_events(frame: FrameDetections) -> set[Event]:
    """Presence events for one frame; order of detections is irrelevant."""
    found = set()
    for d in frame.detections:
        if d.cls is DetectionClass.BUCKET_VERTICAL:
            found.add(Event.VERTICAL_BUCKET)
        elif d.cls is DetectionClass.BUCKET_HORIZONTAL:
            found.add(Event.HORIZONTAL_BUCKET)
        else:
            found.add(Event.TRUCK_FOUND)
    return found


def update_tracker(
    tracker: CoOccurrenceTracker, frame: FrameDetections, cfg: EventWindowConfig
) -> CoOccurrenceTracker:
    """Fold one processed frame into the tracker.

    Appends a distance sample when the frame shows both a truck and a bucket
    (largest of each by box area; bucket pose does not matter here), and
    advances the sighting/absence bookkeeping. Pure; returns a new tracker.
    """
    if tracker.last_frame is not None and frame.frame_index <= tracker.last_frame:
        raise ValueError(
            f"out-of-order frame {frame.frame_index} after {tracker.last_frame}"
        )
    truck = largest(frame.of(DetectionClass.TRUCK))
    bucket = largest(d for d in frame.detections if d.cls in BUCKET_CLASSES)

    samples = tracker.samples
    if truck is not None and bucket is not None:
        sample = (frame.frame_index, bbox_center_distance(truck.box, bucket.box))
        samples = (samples + (sample,))[-cfg.window_length :]

    if truck is not None:
        return CoOccurrenceTracker(
            samples=samples,
            last_truck_frame=frame.frame_index,
            truck_sightings=tracker.truck_sightings + 1,
            frames_since_truck=0,
            last_frame=frame.frame_index,
        )
    return CoOccurrenceTracker(
        samples=samples,
        last_truck_frame=tracker.last_truck_frame,
        truck_sightings=tracker.truck_sightings,
        frames_since_truck=tracker.frames_since_truck + 1,
        last_frame=frame.frame_index,
    )


def _strictly_decreasing(values: Iterable[float]) -> bool:
    run = list(values)
    return all(a > b for a, b in zip(run, run[1:]))


def _strictly_increasing(values: Iterable[float]) -> bool:
    run = list(values)
    return all(a < b for a, b in zip(run, run[1:]))


def _absence_fires(
    tracker: CoOccurrenceTracker, frame: FrameDetections, cfg: EventWindowConfig
) -> bool:
    # tracker must already include this frame
    return (
        not frame.has(DetectionClass.TRUCK)
        and tracker.last_truck_frame is not None
        and tracker.truck_sightings >= 1
        and tracker.frames_since_truck >= cfg.absence_gap
    )


def identify_complex_events(
    tracker: CoOccurrenceTracker, frame: FrameDetections, cfg: EventWindowConfig
) -> set[Event]:
    """Distance-trend and absence events for a frame already folded into the
    tracker.

    BUCKET_APPROACHING fires when the most recent min_cooccurrences distance
    samples are strictly decreasing; TRUCK_AWAY when they are strictly
    increasing, or when a previously sighted truck has been absent for at
    least absence_gap processed frames. The two distance branches can never
    fire together.
    """
    found: set[Event] = set()
    if len(tracker.samples) >= cfg.min_cooccurrences:
        recent = [d for _, d in tracker.samples[-cfg.min_cooccurrences :]]
        if _strictly_decreasing(recent):
            found.add(Event.BUCKET_APPROACHING)
        elif _strictly_increasing(recent):
            found.add(Event.TRUCK_AWAY)
    if _absence_fires(tracker, frame, cfg):
        found.add(Event.TRUCK_AWAY)
    return found


def step_events(
    tracker: CoOccurrenceTracker, frame: FrameDetections, cfg: EventWindowConfig
) -> tuple[CoOccurrenceTracker, list[Event]]:
    """Process one frame: update the tracker, emit this frame's events in
    canonical order, and apply post-event resets.

    An absence-triggered TRUCK_AWAY clears the sighting count so one
    departure emits one event; the truck must be seen again before the
    absence branch can re-fire.
    """
    simple = identify_simple_events(frame)
    tracker = update_tracker(tracker, frame, cfg)
    complex_ = identify_complex_events(tracker, frame, cfg)
    if Event.TRUCK_AWAY in complex_ and _absence_fires(tracker, frame, cfg):
        tracker = replace(tracker, truck_sightings=0)
    if cfg.reset_window_after_event and complex_ & {Event.BUCKET_APPROACHING, Event.TRUCK_AWAY}:
        tracker = replace(tracker, samples=())
    return tracker, ordered(simple | complex_)


def identify_events(
    frames: Iterable[FrameDetections], cfg: EventWindowConfig
) -> Iterator[EventOccurrence]:
    """The full event stream for a processed frame sequence."""
    tracker = CoOccurrenceTracker()
    for frame in frames:
        tracker, events = step_events(tracker, frame, cfg)
        for event in events:
            yield EventOccurrence(event, frame.frame_index, frame.timestamp)


def serialize_event_trace(occurrences: Iterable[EventOccurrence]) -> Iterator[str]:
    """Line-delimited event trace: {"frame": ..., "t": ..., "event": "e0"}."""
    for occ in occurrences:
        yield json.dumps(
            {"frame": occ.frame_index, "t": occ.timestamp, "event": occ.event.value}
        )
