"""Detection-record parsing and per-frame stream filtering.

The wire format is line-delimited JSON, one detection per line:

    {"frame": 17, "t": 0.68, "class": "truck",
     "x": 1370.0, "y": 585.0, "w": 260.0, "h": 130.0, "conf": 0.9}

Frames with no detections appear as ``{"frame": 17, "t": 0.68, "class": null}``
or are omitted entirely; ``densify_frames`` makes the two representations
indistinguishable downstream. A stream may open with a single
``{"header": {...}}`` line, which the parser skips.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Iterator


class DetectionClass(Enum):
    TRUCK = "truck"
    BUCKET_VERTICAL = "bucket_vertical"
    BUCKET_HORIZONTAL = "bucket_horizontal"


_CLASS_BY_NAME = {c.value: c for c in DetectionClass}

BUCKET_CLASSES = frozenset(
    {DetectionClass.BUCKET_VERTICAL, DetectionClass.BUCKET_HORIZONTAL}
)


class StreamFormatError(ValueError):
    """A malformed input line; the message carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


@dataclass(frozen=True)
class BoundingBox:
    """Pixel-space box: top-left corner plus positive width and height."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self) -> None:
        if not (self.w > 0 and self.h > 0):
            raise ValueError(f"box sides must be positive, got w={self.w} h={self.h}")

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)


@dataclass(frozen=True)
class Detection:
    cls: DetectionClass
    box: BoundingBox
    confidence: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence out of range: {self.confidence}")


@dataclass(frozen=True)
class FrameDetections:
    """One video frame's detections. frame_index strictly increases along a
    stream; timestamps never decrease."""

    frame_index: int
    timestamp: float
    detections: tuple[Detection, ...] = ()

    def has(self, cls: DetectionClass) -> bool:
        return any(d.cls is cls for d in self.detections)

    def of(self, cls: DetectionClass) -> tuple[Detection, ...]:
        return tuple(d for d in self.detections if d.cls is cls)


@dataclass(frozen=True)
class FilterConfig:
    """Stream-cleaning knobs.

    iou_threshold is accepted for config compatibility but never applied:
    the stream is assumed post-NMS, and the one-per-class policy subsumes
    overlap suppression.
    """

    confidence_threshold: float = 0.5
    iou_threshold: float = 0.45
    stride: int = 5
    one_per_class: bool = True

    def __post_init__(self) -> None:
        if not (0.0 <= self.confidence_threshold <= 1.0):
            raise ValueError(f"confidence_threshold out of range: {self.confidence_threshold}")
        if not (0.0 <= self.iou_threshold <= 1.0):
            raise ValueError(f"iou_threshold out of range: {self.iou_threshold}")
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")


def _parse_record(line_number: int, line: str) -> tuple[int, float | None, Detection | None]:
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise StreamFormatError(line_number, f"invalid JSON ({exc.msg})") from exc
    if not isinstance(raw, dict):
        raise StreamFormatError(line_number, "record is not an object")

    frame = raw.get("frame")
    if not isinstance(frame, int) or isinstance(frame, bool) or frame < 0:
        raise StreamFormatError(line_number, f"bad frame index: {frame!r}")

    t = raw.get("t")
    if t is not None:
        if not isinstance(t, (int, float)) or isinstance(t, bool) or t < 0:
            raise StreamFormatError(line_number, f"bad timestamp: {t!r}")
        t = float(t)

    if "class" not in raw:
        raise StreamFormatError(line_number, "missing 'class' (use null for an empty frame)")
    name = raw["class"]
    if name is None:
        return frame, t, None
    cls = _CLASS_BY_NAME.get(name)
    if cls is None:
        known = ", ".join(sorted(_CLASS_BY_NAME))
        raise StreamFormatError(line_number, f"unknown class {name!r} (expected one of: {known})")

    fields = {}
    for key in ("x", "y", "w", "h", "conf"):
        value = raw.get(key)
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise StreamFormatError(line_number, f"missing or non-numeric {key!r}")
        fields[key] = float(value)
    if not (0.0 <= fields["conf"] <= 1.0):
        raise StreamFormatError(line_number, f"confidence out of range: {fields['conf']}")
    try:
        box = BoundingBox(fields["x"], fields["y"], fields["w"], fields["h"])
    except ValueError as exc:
        raise StreamFormatError(line_number, str(exc)) from exc
    return frame, t, Detection(cls, box, fields["conf"])


def parse_detection_stream(
    lines: Iterable[str], fps: float = 25.0
) -> Iterator[FrameDetections]:
    """Parse wire-format lines into frames, grouped by frame index.

    Yields one FrameDetections per frame index present in the input, in file
    order. When no record of a frame carries an explicit timestamp, it is
    synthesized as frame_index / fps. Validation failures raise
    StreamFormatError with the offending line number.
    """
    if fps <= 0:
        raise ValueError(f"fps must be positive, got {fps}")

    current: int | None = None
    current_t: float | None = None
    dets: list[Detection] = []
    last_emitted_t = 0.0

    def flush() -> FrameDetections:
        nonlocal last_emitted_t
        assert current is not None
        if current_t is not None:
            t = current_t
        else:
            # synthesized fallback; clamped so mixed explicit/missing
            # timestamps cannot break the nondecreasing invariant
            t = max(current / fps, last_emitted_t)
        last_emitted_t = t
        return FrameDetections(current, t, tuple(dets))

    first = True
    for line_number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        if first:
            first = False
            try:
                maybe = json.loads(line)
            except json.JSONDecodeError:
                maybe = None
            if isinstance(maybe, dict) and "header" in maybe:
                continue
        frame, t, det = _parse_record(line_number, line)
        if current is not None and frame < current:
            raise StreamFormatError(
                line_number, f"frame index regression: {frame} after {current}"
            )
        if frame != current:
            if current is not None:
                emitted = flush()
                yield emitted
            current, current_t, dets = frame, None, []
        if t is not None and current_t is None:
            current_t = t
        if current_t is not None and current_t < last_emitted_t:
            raise StreamFormatError(
                line_number,
                f"timestamp decreased: {current_t} after {last_emitted_t}",
            )
        if det is not None:
            dets.append(det)
    if current is not None:
        yield flush()


def read_stream_header(lines: Iterable[str]) -> dict | None:
    """Return the leading {"header": ...} payload if the stream has one."""
    for line in lines:
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError:
            return None
        if isinstance(raw, dict) and "header" in raw:
            return raw["header"]
        return None
    return None


def serialize_detection_stream(
    frames: Iterable[FrameDetections], header: dict | None = None
) -> Iterator[str]:
    """Render frames back to wire-format lines (inverse of parsing).

    Empty frames become explicit null-class markers so the re-parsed stream
    is identical frame for frame.
    """
    if header is not None:
        yield json.dumps({"header": header}, sort_keys=True)
    for frame in frames:
        if not frame.detections:
            yield json.dumps(
                {"frame": frame.frame_index, "t": frame.timestamp, "class": None}
            )
            continue
        for d in frame.detections:
            yield json.dumps(
                {
                    "frame": frame.frame_index,
                    "t": frame.timestamp,
                    "class": d.cls.value,
                    "x": d.box.x,
                    "y": d.box.y,
                    "w": d.box.w,
                    "h": d.box.h,
                    "conf": d.confidence,
                }
            )


def densify_frames(frames: Iterable[FrameDetections]) -> Iterator[FrameDetections]:
    """Materialize omitted frame indices as empty frames.

    An omitted index counts as an empty frame for adjacency purposes, so the
    stride and the truck-absence logic see the same stream whether gaps were
    written out or skipped. Gap frames inherit the predecessor's timestamp,
    which keeps timestamps nondecreasing regardless of the source's frame
    rate.
    """
    previous: FrameDetections | None = None
    for frame in frames:
        if previous is not None:
            for missing in range(previous.frame_index + 1, frame.frame_index):
                yield FrameDetections(missing, previous.timestamp, ())
        yield frame
        previous = frame


def filter_by_confidence(frame: FrameDetections, threshold: float) -> FrameDetections:
    """Keep detections with confidence >= threshold."""
    if not (0.0 <= threshold <= 1.0):
        raise ValueError(f"threshold out of range: {threshold}")
    kept = tuple(d for d in frame.detections if d.confidence >= threshold)
    if len(kept) == len(frame.detections):
        return frame
    return replace(frame, detections=kept)


def top1_per_class(frame: FrameDetections) -> FrameDetections:
    """Keep at most one detection per class: highest confidence, ties broken
    by larger box area, then by input order."""
    best: dict[DetectionClass, tuple[int, Detection]] = {}
    for position, d in enumerate(frame.detections):
        held = best.get(d.cls)
        if held is None:
            best[d.cls] = (position, d)
            continue
        _, incumbent = held
        if (d.confidence, d.box.area) > (incumbent.confidence, incumbent.box.area):
            best[d.cls] = (position, d)
    if len(best) == len(frame.detections):
        return frame
    winners = tuple(d for _, d in sorted(best.values()))
    return replace(frame, detections=winners)


def apply_stride(frames: Iterable[FrameDetections], k: int) -> Iterator[FrameDetections]:
    """Keep frames whose 0-based ordinal position is a multiple of k."""
    if k < 1:
        raise ValueError(f"stride must be >= 1, got {k}")
    for position, frame in enumerate(frames):
        if position % k == 0:
            yield frame


def bbox_center_distance(a: BoundingBox, b: BoundingBox) -> float:
    """Euclidean distance between box centers, in pixels."""
    return math.dist(a.center, b.center)


def largest(detections: Iterable[Detection]) -> Detection | None:
    """The detection with the biggest box area, None for an empty input."""
    best: Detection | None = None
    for d in detections:
        if best is None or d.box.area > best.box.area:
            best = d
    return best
