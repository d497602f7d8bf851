#!/usr/bin/env python3
# Drive the event identifier by hand: a bucket swings toward a parked truck,
# unloads, and the truck leaves. Simple events are per-frame presence checks;
# the approach/away events come from the distance trend between the largest
# truck box and the largest bucket box.
from excount.events import EventWindowConfig, identify_events
from excount.stream import BoundingBox, Detection, DetectionClass, FrameDetections

TRUCK = DetectionClass.TRUCK
VERT = DetectionClass.BUCKET_VERTICAL
HORIZ = DetectionClass.BUCKET_HORIZONTAL


def frame(index, *specs):
    dets = tuple(
        Detection(cls, BoundingBox(x, 0.0, 10.0, 10.0), 0.9) for cls, x in specs
    )
    return FrameDetections(index, index * 0.2, dets)


frames = [
    frame(0, (VERT, 40.0)),                      # digging, no truck yet
    frame(1, (VERT, 40.0), (TRUCK, 400.0)),      # truck arrives: distance 360
    frame(2, (HORIZ, 120.0), (TRUCK, 400.0)),    # carrying, distance 280
    frame(3, (HORIZ, 200.0), (TRUCK, 400.0)),    # distance 200: third shrink
    frame(4, (HORIZ, 280.0), (TRUCK, 400.0)),    # distance 120
    frame(5, (VERT, 390.0), (TRUCK, 400.0)),     # unloading over the bed
    frame(6, (VERT, 40.0)),                      # truck gone
    frame(7, (VERT, 40.0)),
]

for occ in identify_events(frames, EventWindowConfig()):
    print(f"frame {occ.frame_index} t={occ.timestamp:.1f}s  {occ.event.value}  {occ.event.name}")

# e3 (bucket approaching) needs three co-occurrence samples with strictly
# shrinking distance, so it first fires on frame 3. The truck-away e4 on
# frame 6 is the absence form: a truck was being seen, then was not. Frames
# 6-7 also replay e3 because no truck means no new distance samples and the
# window still ends in a shrink; the state machine downstream is what makes
# that replay harmless.
