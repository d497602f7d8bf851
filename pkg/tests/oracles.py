"""Independent reference implementations used as test oracles.

Deliberately naive: full-history lists instead of ring buffers, dict-of-dicts
table interpretation, exhaustive matching search. Slow and obviously correct
is the point; production code must agree with these on every input.
"""
from __future__ import annotations

import math
from functools import lru_cache

from excount.events import Event, EventWindowConfig
from excount.stream import DetectionClass, FrameDetections

_BUCKETS = (DetectionClass.BUCKET_VERTICAL, DetectionClass.BUCKET_HORIZONTAL)


def _biggest(frame: FrameDetections, classes) -> tuple[float, float] | None:
    best_area = -1.0
    center = None
    for d in frame.detections:
        if d.cls in classes:
            area = d.box.w * d.box.h
            if area > best_area:
                best_area = area
                center = (d.box.x + d.box.w / 2, d.box.y + d.box.h / 2)
    return center


def naive_event_replay(
    frames: list[FrameDetections], cfg: EventWindowConfig
) -> list[list[Event]]:
    """Per-frame events computed from complete history lists each step."""
    all_samples: list[float] = []
    truck_positions: list[int] = []  # positions in the processed sequence
    fired_absence_after: int = -1  # position of the last absence TRUCK_AWAY
    buffer_start = 0  # first sample index still in the window after resets
    out: list[list[Event]] = []

    for position, frame in enumerate(frames):
        found: set[Event] = set()
        classes = {d.cls for d in frame.detections}
        if DetectionClass.BUCKET_VERTICAL in classes:
            found.add(Event.VERTICAL_BUCKET)
        if DetectionClass.BUCKET_HORIZONTAL in classes:
            found.add(Event.HORIZONTAL_BUCKET)
        truck_here = DetectionClass.TRUCK in classes
        if truck_here:
            found.add(Event.TRUCK_FOUND)
            truck_positions.append(position)

        truck = _biggest(frame, (DetectionClass.TRUCK,))
        bucket = _biggest(frame, _BUCKETS)
        if truck is not None and bucket is not None:
            all_samples.append(math.dist(truck, bucket))

        window = all_samples[max(len(all_samples) - cfg.window_length, buffer_start):]
        fired_complex = False
        if len(window) >= cfg.min_cooccurrences:
            recent = window[-cfg.min_cooccurrences:]
            if all(a > b for a, b in zip(recent, recent[1:])):
                found.add(Event.BUCKET_APPROACHING)
                fired_complex = True
            elif all(a < b for a, b in zip(recent, recent[1:])):
                found.add(Event.TRUCK_AWAY)
                fired_complex = True

        sightings = sum(1 for p in truck_positions if p > fired_absence_after)
        if (
            not truck_here
            and truck_positions
            and sightings >= 1
            and position - truck_positions[-1] >= cfg.absence_gap
        ):
            found.add(Event.TRUCK_AWAY)
            fired_absence_after = position
            fired_complex = True

        if cfg.reset_window_after_event and fired_complex and (
            found & {Event.BUCKET_APPROACHING, Event.TRUCK_AWAY}
        ):
            buffer_start = len(all_samples)

        out.append(sorted(found, key=lambda e: e.value))
    return out


def naive_fsm_run(
    event_codes: list[str], arcs: dict[str, dict[str, str]]
) -> tuple[str, int, list[bool]]:
    """Interpret a wire-code table the simplest possible way."""
    state = "s0"
    count = 0
    accepted = []
    for code in event_codes:
        target = arcs.get(state, {}).get(code)
        if target is None:
            accepted.append(False)
            continue
        accepted.append(True)
        if target == "s4":
            count += 1
            state = "s0"
        else:
            state = target
    return state, count, accepted


def naive_heuristic(event_codes: list[str], v_needed: int, h_needed: int) -> list[int]:
    """Positions at which the threshold counter completes a workload."""
    v = h = 0
    completions = []
    for position, code in enumerate(event_codes):
        if code == "e0":
            v += 1
        elif code == "e1":
            h += 1
            if v >= v_needed and h >= h_needed:
                completions.append(position)
                v = h = 0
            else:
                v = 0
    return completions


def best_matching(pred: tuple[float, ...], truth: tuple[float, ...], window: float) -> int:
    """Maximum one-to-one matching size under |pred - truth| <= window,
    by exhaustive assignment search."""

    @lru_cache(maxsize=None)
    def solve(i: int, used: int) -> int:
        if i == len(pred):
            return 0
        best = solve(i + 1, used)  # leave pred[i] unmatched
        for j, t in enumerate(truth):
            if used & (1 << j):
                continue
            if abs(pred[i] - t) <= window:
                best = max(best, 1 + solve(i + 1, used | (1 << j)))
        return best

    result = solve(0, 0)
    solve.cache_clear()
    return result
