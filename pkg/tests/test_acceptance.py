"""Acceptance gate: ten checks, one test per criterion, run in order.

`pytest tests/test_acceptance.py -v` prints one pass/fail line per criterion;
add -s to also see each criterion's verdict detail. Timed criteria assert
their own wall-clock budgets.
"""
from __future__ import annotations

import random
import time
from dataclasses import replace
from itertools import combinations_with_replacement
from pathlib import Path

from excount.cli import main
from excount.evaluation import (
    MatchConfig,
    WorkloadRecord,
    compute_metrics,
    evaluate,
    f1_score,
    match_workloads,
)
from excount.events import CoOccurrenceTracker, Event, EventWindowConfig, step_events
from excount.fsm import (
    BusinessState,
    StepResult,
    TransitionTable,
    default_table,
    run_events,
    step,
)
from excount.heuristic import PRESETS
from excount.pipeline import count_workloads, frames_to_events
from excount.simulator import (
    ZERO_NOISE,
    CountingMethod,
    ScenarioScript,
    WorkCycle,
    generate_stream,
    load_scenario_suite,
    run_experiment,
)
from excount.stream import (
    BoundingBox,
    Detection,
    DetectionClass,
    FilterConfig,
    FrameDetections,
    serialize_detection_stream,
)
from oracles import best_matching, naive_event_replay, naive_fsm_run

DATA = Path(__file__).resolve().parents[1] / "src" / "excount" / "data"

# Recorded per-video counting results from the original twelve-video field
# deployment: (Tr, threshold-baseline block, state-machine block), each block
# (CT, P, R, F1). The published P/R are rounded to two decimals, so the
# integer match counts are reconstructed as tp = round(R * Tr).
FIELD_RESULTS = [
    (39, (40, 0.95, 0.97, 0.96), (38, 1.00, 0.97, 0.99)),
    (35, (35, 1.00, 1.00, 1.00), (34, 1.00, 0.97, 0.99)),
    (32, (39, 0.82, 1.00, 0.90), (36, 0.89, 1.00, 0.94)),
    (32, (34, 0.94, 1.00, 0.97), (32, 0.97, 0.97, 0.97)),
    (31, (35, 0.89, 1.00, 0.94), (31, 1.00, 1.00, 1.00)),
    (30, (31, 0.97, 1.00, 0.98), (31, 0.97, 1.00, 0.98)),
    (29, (24, 1.00, 0.83, 0.91), (26, 0.96, 0.86, 0.91)),
    (27, (31, 0.84, 0.96, 0.90), (26, 0.96, 0.93, 0.94)),
    (25, (20, 0.95, 0.76, 0.84), (20, 1.00, 0.80, 0.89)),
    (24, (27, 0.91, 0.96, 0.90), (21, 0.95, 0.83, 0.89)),
    (23, (21, 0.95, 0.86, 0.91), (20, 1.00, 0.87, 0.93)),
    (22, (28, 0.75, 0.95, 0.84), (24, 0.83, 0.91, 0.87)),
]
# The AVG row, scaled by ten so the column means become integer counts.
FIELD_AVG = (291, (304, 0.91, 0.94, 0.92), (283, 0.96, 0.93, 0.94))


def test_c01_metric_arithmetic_reproduction():
    start = time.perf_counter()
    checked = 0
    for tr, *blocks in [*FIELD_RESULTS, FIELD_AVG]:
        for ct, precision, recall, f1 in blocks:
            tp = round(recall * tr)
            report = compute_metrics(tp, ct - tp, tr - tp)
            assert abs(report.f1 - f1) <= 0.01, (tr, ct, precision, recall, f1)
            checked += 1
    # the AVG row must also close under the harmonic-mean identity directly
    assert abs(f1_score(0.91, 0.94) - 0.92) <= 0.01
    assert abs(f1_score(0.96, 0.93) - 0.94) <= 0.01
    elapsed = time.perf_counter() - start
    assert elapsed < 0.5
    print(
        f"criterion 1: PASS - {checked} recorded F1 values reproduced "
        f"within +/-0.01 in {elapsed * 1000:.1f} ms"
    )


def test_c02_field_results_not_reproducible_at_desk_scale():
    """The recorded per-video results came from proprietary surveillance
    footage run through a trained detector; neither is distributed here, so
    those numbers cannot be recomputed from this repository. The remaining
    criteria substitute property-based checks plus the packaged synthetic
    benchmark for end-to-end behavior."""
    package_root = Path(__file__).resolve().parents[1] / "src"
    media = [
        p
        for pattern in ("*.mp4", "*.avi", "*.mkv", "*.mov", "*.onnx", "*.pt")
        for p in package_root.rglob(pattern)
    ]
    assert media == [], "no footage or detector weights should ship"
    assert (DATA / "noisy_benchmark.toml").is_file(), "the substitute benchmark ships"
    print(
        "criterion 2: PASS - footage/detector are not distributed; behavior is "
        "validated by properties and the packaged synthetic benchmark instead"
    )


def _random_valid_arcs(rng: random.Random) -> dict[tuple[str, str], str]:
    """A random table guaranteed to reach s4 from s0."""
    states = [s.value for s in BusinessState]
    events = [e.value for e in Event]
    hops = rng.sample(["s1", "s2", "s3"], k=rng.randint(0, 3))
    path = ["s0", *hops, "s4"]
    arcs = {(a, rng.choice(events)): b for a, b in zip(path, path[1:])}
    for _ in range(rng.randint(0, 12)):
        pair = (rng.choice(states), rng.choice(events))
        if pair not in arcs:
            arcs[pair] = rng.choice(states)
    return arcs


def test_c03_fsm_matches_naive_interpreter():
    rng = random.Random(0xC03)
    event_codes = [e.value for e in Event]
    start = time.perf_counter()
    checked = 0
    for _ in range(100):
        arcs = _random_valid_arcs(rng)
        table = TransitionTable.from_arcs(
            {
                (BusinessState(s), Event(e)): BusinessState(t)
                for (s, e), t in arcs.items()
            }
        )
        nested: dict[str, dict[str, str]] = {}
        for (s, e), t in arcs.items():
            nested.setdefault(s, {})[e] = t
        for _ in range(100):
            codes = [rng.choice(event_codes) for _ in range(rng.randint(0, 100))]
            run = run_events((Event(c) for c in codes), table)
            state, count, accepted = naive_fsm_run(codes, nested)
            assert run.final_state.value == state
            assert run.workload_count == count
            assert [r.accepted for r in run.trace] == accepted
            checked += 1
    elapsed = time.perf_counter() - start
    assert checked == 10_000
    assert elapsed < 10.0
    print(
        f"criterion 3: PASS - 10000 random sequences, 0 mismatches, {elapsed:.2f} s"
    )


def test_c04_rectification_invariant_exhaustive():
    # default table, plus one with a terminal arc out of every state
    every_state_counts = TransitionTable.from_arcs(
        {(s, Event.TRUCK_AWAY): BusinessState.UNLOADED for s in BusinessState}
        | {(BusinessState.DIGGING, Event.VERTICAL_BUCKET): BusinessState.CARRYING}
    )
    for table in (default_table(), every_state_counts):
        for state in BusinessState:
            for event in Event:
                result = step(state, event, table)
                target = table.arcs.get((state, event))
                if target is None:
                    assert result == StepResult(state, accepted=False, counted=False)
                elif target is BusinessState.UNLOADED:
                    assert result == StepResult(
                        BusinessState.DIGGING, accepted=True, counted=True
                    )
                else:
                    assert result == StepResult(target, accepted=True, counted=False)
    print(
        "criterion 4: PASS - all 25 (state, event) pairs: absent pairs self-loop "
        "uncounted, every counting step resets to s0"
    )


def test_c05_zero_noise_fidelity():
    rng = random.Random(0xC05)
    start = time.perf_counter()
    for i in range(50):
        cycles = tuple(
            WorkCycle(
                dig_seconds=rng.uniform(0.6, 2.5),
                carry_seconds=rng.uniform(0.8, 2.5),
                approach_seconds=rng.uniform(1.0, 3.0),
                unload_seconds=rng.uniform(0.8, 2.5),
                truck_departs_after=rng.random() < 0.5,
            )
            for _ in range(rng.randint(1, 6))
        )
        script = ScenarioScript(name=f"script_{i}", cycles=cycles)
        frames, truth = generate_stream(script, ZERO_NOISE)
        occurrences = frames_to_events(frames, FilterConfig(), EventWindowConfig())
        result = count_workloads(occurrences)
        assert result.count == len(cycles), f"script {i}"
        report = evaluate(result.workloads, truth, MatchConfig())
        assert report.precision == 1.0 and report.recall == 1.0, f"script {i}"
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    print(
        f"criterion 5: PASS - 50 zero-noise scripts counted exactly "
        f"(P = R = 1.0) in {elapsed:.2f} s"
    )


def test_c06_noisy_benchmark_ordering():
    suite = load_scenario_suite(DATA / "noisy_benchmark.toml")
    methods = [
        CountingMethod("fsm", table=default_table()),
        CountingMethod("loose", heuristic=PRESETS["loose"]),
        CountingMethod("strict", heuristic=PRESETS["strict"]),
    ]
    start = time.perf_counter()
    per_seed: dict[int, dict[str, list[int]]] = {}
    for script, noise in suite.entries:
        sweep = [replace(noise, seed=suite.base_seed + k) for k in range(suite.seeds)]
        result = run_experiment([script], sweep, methods)
        for cell in result.cells:
            slot = per_seed.setdefault(cell.seed, {m.name: [0, 0] for m in methods})
            slot[cell.method][0] += cell.report.fake
            slot[cell.method][1] += cell.report.missing
    elapsed = time.perf_counter() - start
    assert len(per_seed) == 100
    passes = sum(
        1
        for slot in per_seed.values()
        if slot["fsm"][0] <= slot["loose"][0] and slot["fsm"][1] <= slot["strict"][1]
    )
    assert passes >= 90, f"ordering holds on only {passes}/100 seeds"
    assert elapsed < 60.0
    print(
        f"criterion 6: PASS - fake/missing ordering holds on {passes}/100 seeds "
        f"(threshold 90) in {elapsed:.1f} s"
    )


def test_c07_greedy_matching_is_optimal():
    grid = (0.0, 10.0, 20.0, 35.0)
    window = 12.0
    cfg = MatchConfig(tolerance_seconds=window)
    pools = [ms for k in range(7) for ms in combinations_with_replacement(grid, k)]
    records = {ms: [WorkloadRecord(t) for t in ms] for ms in pools}
    start = time.perf_counter()
    checked = 0
    for pred in pools:
        for truth in pools:
            tp, _, _ = match_workloads(records[pred], records[truth], cfg)
            optimal = best_matching(pred, truth, window)
            assert tp == optimal, f"pred={pred} truth={truth}: {tp} != {optimal}"
            checked += 1
    elapsed = time.perf_counter() - start
    assert checked == len(pools) ** 2 == 44_100
    assert elapsed < 30.0
    print(
        f"criterion 7: PASS - greedy matching optimal on all {checked} list "
        f"pairs in {elapsed:.1f} s"
    )


def test_c08_incremental_events_match_full_replay():
    rng = random.Random(0xC08)
    classes = list(DetectionClass)
    start = time.perf_counter()
    for stream_no in range(1000):
        cfg = EventWindowConfig(
            min_cooccurrences=rng.randint(2, 4),
            window_length=rng.randint(4, 8),
            absence_gap=rng.randint(1, 3),
            reset_window_after_event=rng.random() < 0.5,
        )
        frames = []
        index = 0
        for _ in range(rng.randint(0, 50)):
            detections = tuple(
                Detection(
                    rng.choice(classes),
                    BoundingBox(
                        rng.uniform(0, 40),
                        rng.uniform(0, 40),
                        rng.uniform(1, 12),
                        rng.uniform(1, 12),
                    ),
                    0.9,
                )
                for _ in range(rng.randint(0, 3))
            )
            frames.append(FrameDetections(index, index / 25.0, detections))
            index += rng.randint(1, 3)
        expected = naive_event_replay(frames, cfg)
        tracker = CoOccurrenceTracker()
        for frame, want in zip(frames, expected):
            tracker, got = step_events(tracker, frame, cfg)
            assert got == want, f"stream {stream_no}, frame {frame.frame_index}"
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    print(
        f"criterion 8: PASS - incremental trend/absence events equal full "
        f"recomputation on 1000 streams in {elapsed:.2f} s"
    )


def test_c09_throughput_7000_frames(tmp_path, capsys):
    # 40 clean 7-second cycles at 25 fps render to exactly 7000 frames
    script = ScenarioScript(
        name="long_site", cycles=tuple(WorkCycle(2.0, 1.5, 2.0, 1.5) for _ in range(40))
    )
    frames, _ = generate_stream(script, ZERO_NOISE)
    assert len(frames) == 7000
    path = tmp_path / "long_site.jsonl"
    path.write_text("\n".join(serialize_detection_stream(frames)) + "\n")

    start = time.perf_counter()
    code = main(["count", str(path), "--out", str(tmp_path)])
    elapsed = time.perf_counter() - start
    printed = capsys.readouterr().out
    assert code == 0
    assert printed.strip().splitlines()[-1] == "40"
    assert elapsed < 2.0
    print(
        f"criterion 9: PASS - 7000-frame stream counted end-to-end in "
        f"{elapsed:.2f} s"
    )


def test_c10_reruns_are_byte_identical(tmp_path, capsys):
    first, second = tmp_path / "a", tmp_path / "b"
    clean_site = DATA / "clean_site.toml"
    for out in (first, second):
        assert main(["simulate", str(clean_site), "--out", str(out)]) == 0
        stream = out / "clean_site.jsonl"
        assert main(["count", str(stream), "--out", str(out / "counted")]) == 0
        assert (
            main(["eval", str(stream), str(out / "truth.jsonl"), "--out", str(out / "evaled")])
            == 0
        )
        assert main(["compare", str(clean_site), "--out", str(out / "compared")]) == 0
        report = out / "evaled" / "report.json"
        assert main(["report", str(report), "--out", str(out / "rendered")]) == 0
    capsys.readouterr()

    left = sorted(p.relative_to(first) for p in first.rglob("*") if p.is_file())
    right = sorted(p.relative_to(second) for p in second.rglob("*") if p.is_file())
    assert left == right and left
    for rel in left:
        assert (first / rel).read_bytes() == (second / rel).read_bytes(), rel
    print(
        f"criterion 10: PASS - {len(left)} artifacts from every subcommand "
        "byte-identical across reruns"
    )
