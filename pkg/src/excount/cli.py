"""Command-line entry point wiring the whole pipeline.

Subcommands: count (detections -> workload count + trace), eval (detections +
truth -> metric reports), compare (scenario file -> method comparison over a
seed sweep), simulate (scenario file -> wire-format streams + truth), and
report (re-render tables from a report.json).

Exit codes are a stable scripting contract: 0 success, 1 input error,
2 configuration error. Every output artifact embeds the effective semantic
configuration and the seed so a rerun from the artifact alone reproduces it
byte for byte; filesystem paths never appear inside artifacts.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from . import __version__
from .config import (
    ConfigError,
    PipelineConfig,
    apply_env_overrides,
    build_config,
    config_as_dict,
    load_raw_config,
    merge_raw,
    resolve_table,
)
from .evaluation import (
    EvalReport,
    WorkloadRecord,
    compute_metrics,
    comparison_csv,
    evaluate,
    load_truth,
    render_comparison_table,
    serialize_truth,
    totals_csv,
)
from .fsm import TransitionTableError, serialize_fsm_trace, table_as_rows
from .heuristic import HeuristicConfig
from .pipeline import count_workloads, frames_to_events, heuristic_workloads
from .simulator import (
    RNG_ALGORITHM,
    CountingMethod,
    ScenarioFileError,
    ScenarioSuite,
    generate_stream,
    load_scenario_suite,
    run_experiment,
    stream_header,
)
from .stream import StreamFormatError, parse_detection_stream, serialize_detection_stream

log = logging.getLogger("excount")


class InputError(Exception):
    """Bad or inconsistent input files (exit code 1)."""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="excount",
        description="Count excavator workloads from object-detection streams.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--config", metavar="PATH", help="TOML config file")
        sp.add_argument("--seed", type=int, metavar="N", help="override the base seed")
        sp.add_argument("--table", metavar="PATH", help="transition table file")
        sp.add_argument(
            "--preset", metavar="NAME", help="restrict to one heuristic preset"
        )
        sp.add_argument("--out", metavar="DIR", help="output directory")

    count = sub.add_parser("count", help="count workloads in a detection file")
    count.add_argument("detections", help="wire-format detection file")
    common(count)
    count.set_defaults(handler=cmd_count)

    evalp = sub.add_parser("eval", help="evaluate counts against ground truth")
    evalp.add_argument("detections", help="detection file, or directory of *.jsonl")
    evalp.add_argument("truth", help="ground-truth file")
    common(evalp)
    evalp.set_defaults(handler=cmd_eval)

    compare = sub.add_parser("compare", help="compare counting methods on scenarios")
    compare.add_argument("scenario", help="scenario suite file")
    common(compare)
    compare.set_defaults(handler=cmd_compare)

    simulate = sub.add_parser("simulate", help="generate synthetic streams + truth")
    simulate.add_argument("scenario", help="scenario suite file")
    common(simulate)
    simulate.set_defaults(handler=cmd_simulate)

    report = sub.add_parser("report", help="re-render tables from a report.json")
    report.add_argument("report", help="report.json from eval or compare")
    common(report)
    report.set_defaults(handler=cmd_report)
    return parser


def _effective_config(args: argparse.Namespace, suite: ScenarioSuite | None = None) -> PipelineConfig:
    """defaults < config file < scenario overrides < environment < flags."""
    raw = load_raw_config(args.config)
    if suite is not None and suite.pipeline_overrides:
        if not isinstance(suite.pipeline_overrides, Mapping):
            raise ConfigError("[pipeline] in the scenario file must be a table")
        raw = merge_raw(raw, suite.pipeline_overrides)
    cfg = build_config(apply_env_overrides(raw))
    if args.table:
        cfg = replace(cfg, table_path=args.table)
    if args.out:
        cfg = replace(cfg, out_dir=args.out)
    log.setLevel(
        logging.WARNING if cfg.verbosity == 0
        else logging.INFO if cfg.verbosity == 1
        else logging.DEBUG
    )
    return cfg


def _presets(cfg: PipelineConfig, only: str | None) -> dict[str, HeuristicConfig]:
    if only is None:
        return dict(sorted(cfg.heuristics.items()))
    preset = cfg.heuristics.get(only)
    if preset is None:
        raise ConfigError(
            f"unknown preset {only!r}; configured: {sorted(cfg.heuristics)}"
        )
    return {only: preset}


def _out_dir(cfg: PipelineConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_text(path: Path, text: str) -> None:
    if text and not text.endswith("\n"):
        text += "\n"
    path.write_text(text, encoding="utf-8")
    log.info("wrote %s", path)


def _write_json(path: Path, payload: dict) -> None:
    _write_text(path, json.dumps(payload, sort_keys=True, indent=2))


def _read_frames(path: Path, fps: float):
    if not path.is_file():
        raise InputError(f"no such detection file: {path}")
    with path.open(encoding="utf-8") as handle:
        return list(parse_detection_stream(handle, fps=fps))


# --- shared report rendering ---------------------------------------------------

def _pool_cells(
    cells: Sequence[Mapping], methods: Sequence[str]
) -> list[tuple[str, dict[str, EvalReport]]]:
    """Pool per-seed match counts into one report per (group, method),
    preserving first-appearance group order."""
    groups: dict[str, dict[str, list[Mapping]]] = {}
    for cell in cells:
        groups.setdefault(cell["group"], {}).setdefault(cell["method"], []).append(cell)
    rows = []
    for group, per_method in groups.items():
        pooled = {}
        for method in methods:
            parts = per_method.get(method, [])
            if not parts:
                raise InputError(f"report has no cells for {group!r}/{method!r}")
            pooled[method] = compute_metrics(
                sum(c["tp"] for c in parts),
                sum(c["fake"] for c in parts),
                sum(c["missing"] for c in parts),
            )
        rows.append((group, pooled))
    return rows


def _totals(cells: Iterable[Mapping], methods: Sequence[str]) -> dict[str, tuple[int, int]]:
    out = {m: (0, 0) for m in methods}
    for cell in cells:
        fake, missing = out[cell["method"]]
        out[cell["method"]] = (fake + cell["fake"], missing + cell["missing"])
    return out


def _render_report_files(out: Path, payload: dict) -> str:
    methods = payload["methods"]
    rows = _pool_cells(payload["cells"], methods)
    text = render_comparison_table(rows, methods, payload.get("match", ""))
    _write_text(out / "report.txt", text)
    _write_text(out / "report.csv", comparison_csv(rows, methods))
    _write_text(out / "totals.csv", totals_csv(_totals(payload["cells"], methods)))
    return text


def _report_cell(group: str, method: str, report: EvalReport, seed: int | None = None) -> dict:
    cell = {
        "group": group,
        "method": method,
        "tp": report.true_positives,
        "fake": report.fake,
        "missing": report.missing,
        "counted": report.counted,
        "truth": report.truth_count,
        "precision": report.precision,
        "recall": report.recall,
        "f1": report.f1,
    }
    if seed is not None:
        cell["seed"] = seed
    return cell


def _match_label(cfg: PipelineConfig) -> str:
    if cfg.match.mode == "count":
        return "count totals only"
    return f"temporal, |dt| <= {cfg.match.tolerance_seconds:g} s"


# --- subcommands -----------------------------------------------------------------

def cmd_count(args: argparse.Namespace) -> int:
    cfg = _effective_config(args)
    table = resolve_table(cfg)
    source = Path(args.detections)
    frames = _read_frames(source, cfg.fps)
    occurrences = list(frames_to_events(frames, cfg.filter, cfg.window))
    out = _out_dir(cfg)

    artifact = {
        "artifact": "count",
        "input": source.stem,
        "seed": args.seed,
        "config": config_as_dict(cfg),
        "table": table_as_rows(table),
    }
    if args.preset is not None:
        preset = _presets(cfg, args.preset)[args.preset]
        workloads = heuristic_workloads(occurrences, preset)
        artifact["method"] = args.preset
        artifact["count"] = len(workloads)
        artifact["completions"] = [w.completion_time for w in workloads]
        _write_text(
            out / f"{source.stem}.completions.jsonl",
            "\n".join(
                json.dumps({"t": w.completion_time, "source": w.source})
                for w in workloads
            ),
        )
        count = len(workloads)
    else:
        result = count_workloads(occurrences, table)
        artifact["method"] = "fsm"
        artifact["count"] = result.count
        artifact["completions"] = [w.completion_time for w in result.workloads]
        _write_text(
            out / f"{source.stem}.trace.jsonl",
            "\n".join(serialize_fsm_trace(result.run.trace)),
        )
        count = result.count
    _write_json(out / f"{source.stem}.count.json", artifact)
    print(count)
    return 0


def _detection_files(path: Path) -> dict[str, Path]:
    """Map video id (file stem) to detection file. Directories take every
    *.jsonl except derived outputs (truth, traces, completions)."""
    if path.is_file():
        return {path.stem: path}
    if not path.is_dir():
        raise InputError(f"no such file or directory: {path}")
    files = {}
    for child in sorted(path.glob("*.jsonl")):
        name = child.name
        if name == "truth.jsonl" or name.endswith((".trace.jsonl", ".completions.jsonl")):
            continue
        files[child.stem] = child
    if not files:
        raise InputError(f"no detection files (*.jsonl) in {path}")
    return files


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = _effective_config(args)
    table = resolve_table(cfg)
    presets = _presets(cfg, args.preset)
    methods = ["fsm", *presets]

    files = _detection_files(Path(args.detections))
    truth_path = Path(args.truth)
    if not truth_path.is_file():
        raise InputError(f"no such truth file: {truth_path}")
    with truth_path.open(encoding="utf-8") as handle:
        truth = load_truth(handle)

    extra_truth = sorted(set(truth) - set(files))
    extra_detections = sorted(set(files) - set(truth))
    if extra_truth or extra_detections:
        parts = []
        if extra_truth:
            parts.append(f"truth videos without detections: {extra_truth}")
        if extra_detections:
            parts.append(f"detection videos without truth: {extra_detections}")
        raise InputError("video identifiers do not match: " + "; ".join(parts))

    cells = []
    for video in sorted(files):
        frames = _read_frames(files[video], cfg.fps)
        occurrences = list(frames_to_events(frames, cfg.filter, cfg.window))
        fsm_pred = count_workloads(occurrences, table).workloads
        cells.append(
            _report_cell(video, "fsm", evaluate(fsm_pred, truth[video], cfg.match))
        )
        for name, preset in presets.items():
            pred = heuristic_workloads(occurrences, preset)
            cells.append(_report_cell(video, name, evaluate(pred, truth[video], cfg.match)))

    payload = {
        "artifact": "eval",
        "seed": args.seed,
        "match": _match_label(cfg),
        "methods": methods,
        "cells": cells,
        "config": config_as_dict(cfg),
        "table": table_as_rows(table),
    }
    out = _out_dir(cfg)
    text = _render_report_files(out, payload)
    _write_json(out / "report.json", payload)
    print(text)
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    suite = load_scenario_suite(args.scenario)
    cfg = _effective_config(args, suite)
    table = resolve_table(cfg)
    presets = _presets(cfg, args.preset)
    methods = ["fsm", *presets]
    counting = [CountingMethod("fsm", table=table)] + [
        CountingMethod(name, heuristic=preset) for name, preset in presets.items()
    ]
    base_seed = args.seed if args.seed is not None else suite.base_seed

    cells = []
    for script, noise in suite.entries:
        sweep = [
            replace(noise, seed=base_seed + offset) for offset in range(suite.seeds)
        ]
        result = run_experiment(
            [script], sweep, counting, cfg.filter, cfg.window, cfg.match
        )
        for cell in result.cells:
            cells.append(
                _report_cell(cell.scenario, cell.method, cell.report, seed=cell.seed)
            )
        log.info("scenario %s: %d seeds done", script.name, suite.seeds)

    payload = {
        "artifact": "compare",
        "seed": {"base_seed": base_seed, "seeds": suite.seeds},
        "match": _match_label(cfg),
        "methods": methods,
        "cells": cells,
        "config": config_as_dict(cfg),
        "table": table_as_rows(table),
    }
    out = _out_dir(cfg)
    text = _render_report_files(out, payload)
    _write_json(out / "report.json", payload)
    print(text)
    totals = _totals(cells, methods)
    for method in methods:
        fake, missing = totals[method]
        print(f"{method}: fake={fake} missing={missing}")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    suite = load_scenario_suite(args.scenario)
    cfg = _effective_config(args, suite)
    seed = args.seed if args.seed is not None else suite.base_seed
    out = _out_dir(cfg)

    truth_by_video: dict[str, list[WorkloadRecord]] = {}
    manifest_entries = []
    for script, noise in suite.entries:
        noise = replace(noise, seed=seed)
        frames, truth = generate_stream(script, noise)
        header = stream_header(script, noise)
        _write_text(
            out / f"{script.name}.jsonl",
            "\n".join(serialize_detection_stream(frames, header=header)),
        )
        truth_by_video[script.name] = truth
        manifest_entries.append(header)
        print(f"{script.name}.jsonl: {len(frames)} frames, {len(truth)} workloads")

    truth_header = json.dumps(
        {"header": {"generator": RNG_ALGORITHM, "seed": seed}}, sort_keys=True
    )
    _write_text(
        out / "truth.jsonl",
        "\n".join([truth_header, *serialize_truth(truth_by_video)]),
    )
    _write_json(
        out / "simulate.json",
        {
            "artifact": "simulate",
            "seed": seed,
            "scenarios": manifest_entries,
            "config": config_as_dict(cfg),
        },
    )
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    cfg = _effective_config(args)
    path = Path(args.report)
    if not path.is_file():
        raise InputError(f"no such report file: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict) or "cells" not in payload or "methods" not in payload:
        raise InputError(f"{path} is not an eval/compare report")
    out = _out_dir(cfg)
    print(_render_report_files(out, payload))
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(message)s")
    try:
        return args.handler(args)
    except (ConfigError, TransitionTableError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (StreamFormatError, ScenarioFileError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
