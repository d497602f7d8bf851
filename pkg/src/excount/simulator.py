"""Synthetic detection streams with known ground truth.

Scripts describe excavator work cycles (dig, carry, approach, unload); the
generator renders them as wire-format detections over a minimal 2D geometry
and injects the classic failure modes: spurious trucks, a transiting
non-target truck, detection dropout, and confidence jitter. Output is a pure
function of (script, noise) including the seed, using numpy's PCG64
generator; streams are indistinguishable from real detector output to the
rest of the pipeline.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .evaluation import EvalReport, MatchConfig, WorkloadRecord, evaluate
from .events import EventOccurrence, EventWindowConfig
from .fsm import TransitionTable, run_fsm
from .heuristic import HeuristicConfig, iter_completions
from .pipeline import frames_to_events
from .stream import (
    BoundingBox,
    Detection,
    DetectionClass,
    FilterConfig,
    FrameDetections,
)

RNG_ALGORITHM = "numpy:pcg64"


@dataclass(frozen=True)
class WorkCycle:
    """One work cycle's phase durations, in seconds.

    Durations may be zero (a dig-only script is legal); at least one phase
    must be positive. A cycle yields a ground-truth workload only if its
    unload phase has nonzero length. truck_departs_after controls whether
    the truck leaves the scene after this cycle's unload or stays parked
    through the next dig and carry.
    """

    dig_seconds: float
    carry_seconds: float
    approach_seconds: float
    unload_seconds: float
    truck_departs_after: bool = True

    def __post_init__(self) -> None:
        phases = (
            self.dig_seconds,
            self.carry_seconds,
            self.approach_seconds,
            self.unload_seconds,
        )
        if any(p < 0 for p in phases):
            raise ValueError(f"negative phase duration in {phases}")
        if not any(p > 0 for p in phases):
            raise ValueError("cycle has no positive phase")

    @property
    def total_seconds(self) -> float:
        return (
            self.dig_seconds
            + self.carry_seconds
            + self.approach_seconds
            + self.unload_seconds
        )


@dataclass(frozen=True)
class ScenarioScript:
    name: str
    cycles: tuple[WorkCycle, ...]
    fps: float = 25.0

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("scenario needs a name")
        if not self.cycles:
            raise ValueError("scenario needs at least one cycle")
        if self.fps <= 0:
            raise ValueError(f"fps must be positive, got {self.fps}")


@dataclass(frozen=True)
class NoiseModel:
    """Detection-level corruption. fp_truck_rate inserts a spurious truck
    (person- or pilothouse-shaped) per frame; distractor_truck_prob lets a
    non-target truck transit during a cycle's dig phase; dropout_rate
    suppresses true detections; confidence_jitter perturbs scores."""

    fp_truck_rate: float = 0.0
    distractor_truck_prob: float = 0.0
    dropout_rate: float = 0.0
    confidence_jitter: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("fp_truck_rate", "distractor_truck_prob", "dropout_rate"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{name} out of range: {value}")
        if self.confidence_jitter < 0:
            raise ValueError(f"confidence_jitter must be >= 0, got {self.confidence_jitter}")


ZERO_NOISE = NoiseModel()

# Scene geometry. The bucket digs at one spot and swings along a straight
# line to a hover point above the truck bed; along that whole line the
# distance to the truck shrinks strictly, and during unload it is constant.
_SCENE = (1920.0, 1080.0)
_DIG = (320.0, 760.0)
_HOVER = (1480.0, 560.0)
_TRUCK = (1500.0, 650.0)
_TRUCK_SIZE = (260.0, 130.0)
_BUCKET_SIZE = (150.0, 110.0)
_TRUCK_CONF = 0.9
_BUCKET_CONF = 0.85
_DISTRACTOR_SIZE = (208.0, 104.0)
_DISTRACTOR_CONF = 0.65
_DISTRACTOR_PATH = ((-150.0, 950.0), (800.0, 950.0))
_FP_SHAPES = ((70.0, 150.0), (130.0, 100.0))


def _box_at(center: tuple[float, float], size: tuple[float, float]) -> BoundingBox:
    return BoundingBox(center[0] - size[0] / 2, center[1] - size[1] / 2, size[0], size[1])


def _lerp(a: tuple[float, float], b: tuple[float, float], s: float) -> tuple[float, float]:
    return (a[0] + (b[0] - a[0]) * s, a[1] + (b[1] - a[1]) * s)


@dataclass(frozen=True)
class _Segment:
    start: float
    end: float
    cycle: int
    phase: str  # dig | carry | approach | unload


def _segments(script: ScenarioScript) -> list[_Segment]:
    out = []
    t = 0.0
    for index, cycle in enumerate(script.cycles):
        for phase, length in (
            ("dig", cycle.dig_seconds),
            ("carry", cycle.carry_seconds),
            ("approach", cycle.approach_seconds),
            ("unload", cycle.unload_seconds),
        ):
            if length > 0:
                out.append(_Segment(t, t + length, index, phase))
                t += length
    return out


def generate_stream(
    script: ScenarioScript, noise: NoiseModel = ZERO_NOISE
) -> tuple[list[FrameDetections], list[WorkloadRecord]]:
    """Render the script as full-rate frames plus its ground truth.

    One truth record per cycle with a nonzero unload phase, stamped at that
    cycle's unload completion time. Noise perturbs detections, never the
    truth.
    """
    rng = np.random.default_rng(noise.seed)
    segments = _segments(script)
    if not segments:
        return [], []
    total = segments[-1].end
    n_frames = int(round(total * script.fps))

    # one decision per cycle, drawn before any frame so order is stable
    distractor_active = [
        bool(noise.distractor_truck_prob > 0 and rng.random() < noise.distractor_truck_prob)
        for _ in script.cycles
    ]

    def jittered(base: float) -> float:
        if noise.confidence_jitter > 0:
            base = base + rng.normal(0.0, noise.confidence_jitter)
        return float(min(max(base, 0.0), 1.0))

    frames: list[FrameDetections] = []
    seg_index = 0
    for i in range(n_frames):
        t = i / script.fps
        while seg_index + 1 < len(segments) and t >= segments[seg_index].end:
            seg_index += 1
        seg = segments[seg_index]
        cycle = script.cycles[seg.cycle]
        progress = (t - seg.start) / (seg.end - seg.start)

        truck_visible = seg.phase in ("approach", "unload") or (
            seg.phase in ("dig", "carry")
            and seg.cycle > 0
            and not script.cycles[seg.cycle - 1].truck_departs_after
        )

        if seg.phase == "dig":
            bucket_cls = DetectionClass.BUCKET_VERTICAL
            bucket_center = _DIG
        elif seg.phase == "unload":
            bucket_cls = DetectionClass.BUCKET_VERTICAL
            bucket_center = _HOVER
        else:
            bucket_cls = DetectionClass.BUCKET_HORIZONTAL
            span = cycle.carry_seconds + cycle.approach_seconds
            into = (t - seg.start) + (cycle.carry_seconds if seg.phase == "approach" else 0.0)
            bucket_center = _lerp(_DIG, _HOVER, into / span)

        detections: list[Detection] = []

        def emit(cls: DetectionClass, center: tuple[float, float],
                 size: tuple[float, float], conf: float) -> None:
            if noise.dropout_rate > 0 and rng.random() < noise.dropout_rate:
                return
            detections.append(Detection(cls, _box_at(center, size), jittered(conf)))

        if truck_visible:
            emit(DetectionClass.TRUCK, _TRUCK, _TRUCK_SIZE, _TRUCK_CONF)
        emit(bucket_cls, bucket_center, _BUCKET_SIZE, _BUCKET_CONF)
        if seg.phase == "dig" and distractor_active[seg.cycle]:
            center = _lerp(_DISTRACTOR_PATH[0], _DISTRACTOR_PATH[1], progress)
            emit(DetectionClass.TRUCK, center, _DISTRACTOR_SIZE, _DISTRACTOR_CONF)
        if noise.fp_truck_rate > 0 and rng.random() < noise.fp_truck_rate:
            shape = _FP_SHAPES[int(rng.integers(len(_FP_SHAPES)))]
            center = (
                float(rng.uniform(shape[0] / 2, _SCENE[0] - shape[0] / 2)),
                float(rng.uniform(shape[1] / 2, _SCENE[1] - shape[1] / 2)),
            )
            conf = float(min(max(rng.normal(0.5, 0.06), 0.3), 0.7))
            detections.append(Detection(DetectionClass.TRUCK, _box_at(center, shape), conf))

        frames.append(FrameDetections(i, t, tuple(detections)))

    truth = []
    elapsed = 0.0
    for cycle in script.cycles:
        elapsed += cycle.total_seconds
        if cycle.unload_seconds > 0:
            truth.append(WorkloadRecord(elapsed, source="ground_truth"))
    return frames, truth


def stream_header(script: ScenarioScript, noise: NoiseModel) -> dict:
    """Reproducibility header embedded in serialized streams."""
    return {
        "generator": RNG_ALGORITHM,
        "seed": noise.seed,
        "scenario": script.name,
        "fps": script.fps,
        "cycles": len(script.cycles),
        "noise": {
            "fp_truck_rate": noise.fp_truck_rate,
            "distractor_truck_prob": noise.distractor_truck_prob,
            "dropout_rate": noise.dropout_rate,
            "confidence_jitter": noise.confidence_jitter,
        },
    }


# --- experiments ----------------------------------------------------------------

@dataclass(frozen=True)
class CountingMethod:
    """One counting pipeline to compare: either a state-machine table or a
    heuristic threshold config."""

    name: str
    table: TransitionTable | None = None
    heuristic: HeuristicConfig | None = None

    def __post_init__(self) -> None:
        if (self.table is None) == (self.heuristic is None):
            raise ValueError("give exactly one of table or heuristic")

    def completions(self, occurrences: Sequence[EventOccurrence]) -> list[WorkloadRecord]:
        if self.table is not None:
            run = run_fsm(occurrences, self.table)
            return [
                WorkloadRecord(r.timestamp, source="fsm") for r in run.trace if r.counted
            ]
        return [
            WorkloadRecord(occ.timestamp, source="heuristic")
            for occ in iter_completions(occurrences, self.heuristic)
        ]


@dataclass(frozen=True)
class ExperimentCell:
    scenario: str
    seed: int
    method: str
    report: EvalReport


@dataclass
class ExperimentResult:
    cells: list[ExperimentCell]

    def totals(self) -> dict[str, tuple[int, int]]:
        """Fake/missing totals per method, summed over all cells."""
        out: dict[str, tuple[int, int]] = {}
        for cell in self.cells:
            fake, missing = out.get(cell.method, (0, 0))
            out[cell.method] = (fake + cell.report.fake, missing + cell.report.missing)
        return out

    def for_method(self, method: str) -> list[ExperimentCell]:
        return [c for c in self.cells if c.method == method]


def run_experiment(
    scripts: Sequence[ScenarioScript],
    noise_grid: Sequence[NoiseModel],
    methods: Sequence[CountingMethod],
    filter_cfg: FilterConfig = FilterConfig(),
    window_cfg: EventWindowConfig = EventWindowConfig(),
    match_cfg: MatchConfig = MatchConfig(),
) -> ExperimentResult:
    """Cross product scripts x noise x methods, each cell evaluated against
    the generated ground truth. Each (script, noise) stream is generated and
    event-identified once, then shared across methods."""
    cells = []
    for script in scripts:
        for noise in noise_grid:
            frames, truth = generate_stream(script, noise)
            occurrences = list(frames_to_events(frames, filter_cfg, window_cfg))
            for method in methods:
                report = evaluate(method.completions(occurrences), truth, match_cfg)
                cells.append(ExperimentCell(script.name, noise.seed, method.name, report))
    return ExperimentResult(cells)


# --- scenario files ---------------------------------------------------------------

@dataclass(frozen=True)
class ScenarioSuite:
    """A scenario file: scripts with their noise, a seed sweep size, and
    optional pipeline-config overrides (same keys as the config file)."""

    entries: tuple[tuple[ScenarioScript, NoiseModel], ...]
    seeds: int = 1
    base_seed: int = 0
    pipeline_overrides: Mapping | None = None

    def noise_for(self, entry_index: int, seed: int) -> NoiseModel:
        return replace(self.entries[entry_index][1], seed=seed)


class ScenarioFileError(ValueError):
    """The scenario file failed to parse or validate."""


def _cycle_from(raw: Mapping, where: str) -> WorkCycle:
    known = {
        "dig_seconds",
        "carry_seconds",
        "approach_seconds",
        "unload_seconds",
        "truck_departs_after",
    }
    unknown = set(raw) - known
    if unknown:
        raise ScenarioFileError(f"{where}: unknown keys {sorted(unknown)}")
    try:
        return WorkCycle(
            dig_seconds=float(raw.get("dig_seconds", 0.0)),
            carry_seconds=float(raw.get("carry_seconds", 0.0)),
            approach_seconds=float(raw.get("approach_seconds", 0.0)),
            unload_seconds=float(raw.get("unload_seconds", 0.0)),
            truck_departs_after=bool(raw.get("truck_departs_after", True)),
        )
    except (TypeError, ValueError) as exc:
        raise ScenarioFileError(f"{where}: {exc}") from exc


def parse_scenario_suite(text: str) -> ScenarioSuite:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioFileError(f"invalid scenario file: {exc}") from exc
    known = {"seeds", "base_seed", "pipeline", "scenario"}
    unknown = set(raw) - known
    if unknown:
        raise ScenarioFileError(f"unknown top-level keys: {sorted(unknown)}")
    scenarios = raw.get("scenario")
    if not isinstance(scenarios, list) or not scenarios:
        raise ScenarioFileError("expected at least one [[scenario]] entry")

    entries = []
    for position, block in enumerate(scenarios, start=1):
        where = f"scenario #{position}"
        known_keys = {"name", "fps", "repeat", "noise", "cycle"}
        unknown = set(block) - known_keys
        if unknown:
            raise ScenarioFileError(f"{where}: unknown keys {sorted(unknown)}")
        name = block.get("name")
        if not isinstance(name, str) or not name:
            raise ScenarioFileError(f"{where}: missing name")
        cycles_raw = block.get("cycle")
        if not isinstance(cycles_raw, list) or not cycles_raw:
            raise ScenarioFileError(f"{where}: expected at least one [[scenario.cycle]]")
        cycles = [
            _cycle_from(c, f"{where} cycle #{n}") for n, c in enumerate(cycles_raw, start=1)
        ]
        repeat = block.get("repeat", 1)
        if not isinstance(repeat, int) or repeat < 1:
            raise ScenarioFileError(f"{where}: repeat must be a positive integer")
        noise_raw = block.get("noise", {})
        noise_known = {
            "fp_truck_rate",
            "distractor_truck_prob",
            "dropout_rate",
            "confidence_jitter",
            "seed",
        }
        unknown = set(noise_raw) - noise_known
        if unknown:
            raise ScenarioFileError(f"{where}: unknown noise keys {sorted(unknown)}")
        try:
            noise = NoiseModel(
                fp_truck_rate=float(noise_raw.get("fp_truck_rate", 0.0)),
                distractor_truck_prob=float(noise_raw.get("distractor_truck_prob", 0.0)),
                dropout_rate=float(noise_raw.get("dropout_rate", 0.0)),
                confidence_jitter=float(noise_raw.get("confidence_jitter", 0.0)),
                seed=int(noise_raw.get("seed", 0)),
            )
            script = ScenarioScript(
                name=name,
                cycles=tuple(cycles) * repeat,
                fps=float(block.get("fps", 25.0)),
            )
        except (TypeError, ValueError) as exc:
            raise ScenarioFileError(f"{where}: {exc}") from exc
        entries.append((script, noise))

    seeds = raw.get("seeds", 1)
    if not isinstance(seeds, int) or seeds < 1:
        raise ScenarioFileError("seeds must be a positive integer")
    base_seed = raw.get("base_seed", 0)
    if not isinstance(base_seed, int):
        raise ScenarioFileError("base_seed must be an integer")
    return ScenarioSuite(
        entries=tuple(entries),
        seeds=seeds,
        base_seed=base_seed,
        pipeline_overrides=raw.get("pipeline"),
    )


def load_scenario_suite(path: str | Path) -> ScenarioSuite:
    return parse_scenario_suite(Path(path).read_text(encoding="utf-8"))
