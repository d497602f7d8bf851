#!/usr/bin/env python3
# Parse a small wire-format detection stream and watch each filtering stage
# narrow it down: densify missing frames, keep every 5th frame, drop weak
# detections, keep one box per class.
import io

from excount.stream import (
    FilterConfig,
    apply_stride,
    densify_frames,
    filter_by_confidence,
    parse_detection_stream,
    top1_per_class,
)

RAW = """\
{"header": {"generator": "demo"}}
{"frame": 0, "class": "bucket_vertical", "x": 300, "y": 740, "w": 150, "h": 110, "conf": 0.85}
{"frame": 0, "class": "bucket_vertical", "x": 310, "y": 750, "w": 40, "h": 30, "conf": 0.55}
{"frame": 0, "class": "truck", "x": 90, "y": 60, "w": 70, "h": 40, "conf": 0.31}
{"frame": 2, "class": null, "x": 0, "y": 0, "w": 0, "h": 0, "conf": 0}
{"frame": 5, "class": "bucket_horizontal", "x": 700, "y": 600, "w": 150, "h": 110, "conf": 0.92}
{"frame": 5, "class": "truck", "x": 1400, "y": 620, "w": 260, "h": 130, "conf": 0.88}
{"frame": 7, "class": "truck", "x": 1410, "y": 621, "w": 260, "h": 130, "conf": 0.90}
"""

frames = list(parse_detection_stream(io.StringIO(RAW), fps=25.0))
print(f"parsed {len(frames)} frames (frame 2 was an explicit empty marker)")
for f in frames:
    print(f"  frame {f.frame_index} t={f.timestamp:.2f}s: {len(f.detections)} detections")

# frames 1, 3, 4 and 6 were never mentioned; densify makes them explicit
dense = list(densify_frames(frames))
print(f"\ndensified to {len(dense)} frames (gaps become empty frames)")

cfg = FilterConfig()  # confidence 0.5, stride 5, one box per class
strided = list(apply_stride(dense, cfg.stride))
print(f"stride {cfg.stride} keeps frames {[f.frame_index for f in strided]}")

for f in strided:
    confident = filter_by_confidence(f, cfg.confidence_threshold)
    best = top1_per_class(confident)
    names = sorted(d.cls.value for d in best.detections)
    print(f"  frame {f.frame_index}: {len(f.detections)} -> {len(best.detections)} {names}")

# the 0.31 truck fell to the confidence gate and the duplicate vertical
# bucket lost the one-per-class tie-break (lower confidence)
