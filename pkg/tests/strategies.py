"""Shared hypothesis strategies for detection frames and event streams."""
from __future__ import annotations

from hypothesis import strategies as st

from excount.events import Event
from excount.stream import BoundingBox, Detection, DetectionClass, FrameDetections

# Coordinates on a coarse grid so distance ties happen often; ties are where
# strict-trend logic earns its keep.
coords = st.integers(min_value=0, max_value=40).map(float)
sizes = st.integers(min_value=1, max_value=12).map(float)
confidences = st.sampled_from([0.1, 0.3, 0.5, 0.55, 0.7, 0.9, 1.0])


@st.composite
def detections(draw) -> Detection:
    cls = draw(st.sampled_from(list(DetectionClass)))
    box = BoundingBox(draw(coords), draw(coords), draw(sizes), draw(sizes))
    return Detection(cls, box, draw(confidences))


@st.composite
def frame_sequences(draw, max_frames: int = 30, max_dets: int = 4) -> list[FrameDetections]:
    """Frames with strictly increasing indices (gaps allowed) and
    nondecreasing synthetic timestamps."""
    count = draw(st.integers(min_value=0, max_value=max_frames))
    gaps = draw(
        st.lists(st.integers(min_value=1, max_value=3), min_size=count, max_size=count)
    )
    frames = []
    index = 0
    for gap in gaps:
        index += gap
        dets = draw(st.lists(detections(), min_size=0, max_size=max_dets))
        frames.append(FrameDetections(index, index / 25.0, tuple(dets)))
    return frames


events = st.sampled_from(list(Event))
event_streams = st.lists(events, min_size=0, max_size=60)
