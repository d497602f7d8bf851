"""Workload-counting state machine with valid-event rectification.

Each state accepts only the events listed for it in the transition table;
every other (state, event) pair is a self-loop that leaves the run untouched.
Reaching UNLOADED counts one workload and resets to DIGGING within the same
step, so UNLOADED is never observable as a resting state.
"""
from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .events import Event, EventOccurrence


class BusinessState(Enum):
    """The five business states; values are the wire codes used in transition
    tables and trace files."""

    DIGGING = "s0"
    CARRYING = "s1"
    APPROACHING = "s2"
    POSSIBLY_UNLOADED = "s3"
    UNLOADED = "s4"


START_STATE = BusinessState.DIGGING
TERMINAL_STATE = BusinessState.UNLOADED

_STATE_BY_CODE = {s.value: s for s in BusinessState}
_EVENT_BY_CODE = {e.value: e for e in Event}


class TransitionTableError(ValueError):
    """The table text failed to parse or validate."""


@dataclass(frozen=True)
class TransitionTable:
    """Mapping (state, event) -> next state. Pairs absent from the mapping
    self-loop without being accepted.

    Arcs out of UNLOADED are tolerated but unreachable: entering UNLOADED
    counts and resets within the same step, so it is never the current state.
    """

    arcs: Mapping[tuple[BusinessState, Event], BusinessState]

    def next(self, state: BusinessState, event: Event) -> tuple[BusinessState, bool]:
        """Rectifying lookup: (target, accepted)."""
        target = self.arcs.get((state, event))
        if target is None:
            return state, False
        return target, True

    def valid_events(self, state: BusinessState) -> frozenset[Event]:
        return frozenset(e for (s, e) in self.arcs if s is state)

    @classmethod
    def from_arcs(
        cls, arcs: Mapping[tuple[BusinessState, Event], BusinessState]
    ) -> "TransitionTable":
        table = cls(dict(arcs))
        _check_reachable(table)
        return table


def _check_reachable(table: TransitionTable) -> None:
    seen = {START_STATE}
    frontier = [START_STATE]
    while frontier:
        state = frontier.pop()
        for (source, _), target in table.arcs.items():
            if source is state and target not in seen:
                seen.add(target)
                frontier.append(target)
    if TERMINAL_STATE not in seen:
        raise TransitionTableError(
            f"no path from {START_STATE.value} to {TERMINAL_STATE.value}: "
            "the table can never count a workload"
        )


def parse_transition_table(text: str) -> TransitionTable:
    """Parse TOML [[transition]] triples into a validated table.

    Rejects unknown state/event codes, duplicate (state, event) pairs, and
    tables with no path from the start state to the terminal state.
    """
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise TransitionTableError(f"invalid table file: {exc}") from exc
    rows = raw.get("transition")
    if not isinstance(rows, list) or not rows:
        raise TransitionTableError("expected at least one [[transition]] entry")
    unknown_top = set(raw) - {"transition"}
    if unknown_top:
        raise TransitionTableError(f"unknown top-level keys: {sorted(unknown_top)}")

    arcs: dict[tuple[BusinessState, Event], BusinessState] = {}
    for position, row in enumerate(rows, start=1):
        if set(row) != {"state", "event", "next"}:
            raise TransitionTableError(
                f"transition #{position}: expected exactly the keys state/event/next, "
                f"got {sorted(row)}"
            )
        state = _STATE_BY_CODE.get(row["state"])
        if state is None:
            raise TransitionTableError(
                f"transition #{position}: unknown state {row['state']!r}"
            )
        event = _EVENT_BY_CODE.get(row["event"])
        if event is None:
            raise TransitionTableError(
                f"transition #{position}: unknown event {row['event']!r}"
            )
        target = _STATE_BY_CODE.get(row["next"])
        if target is None:
            raise TransitionTableError(
                f"transition #{position}: unknown state {row['next']!r}"
            )
        if (state, event) in arcs:
            raise TransitionTableError(
                f"transition #{position}: duplicate pair ({state.value}, {event.value})"
            )
        arcs[(state, event)] = target
    return TransitionTable.from_arcs(arcs)


def load_transition_table(path: str | Path) -> TransitionTable:
    return parse_transition_table(Path(path).read_text(encoding="utf-8"))


def default_table() -> TransitionTable:
    """The table shipped with the package (data/default_transitions.toml)."""
    text = (
        resources.files("excount").joinpath("data/default_transitions.toml").read_text("utf-8")
    )
    return parse_transition_table(text)


@dataclass(frozen=True)
class StepResult:
    state: BusinessState
    accepted: bool
    counted: bool


def step(state: BusinessState, event: Event, table: TransitionTable) -> StepResult:
    """One transition with rectification.

    Absent pairs self-loop unaccepted. A step whose target is the terminal
    state counts a workload and lands on the start state.
    """
    target, accepted = table.next(state, event)
    # rectified self-loops never count, even when the current state is the
    # terminal one (reachable only by calling step() directly)
    counted = accepted and target is TERMINAL_STATE
    visible = START_STATE if counted else target
    return StepResult(visible, accepted, counted)


@dataclass(frozen=True)
class TraceRecord:
    frame_index: int
    timestamp: float
    event: Event
    state_before: BusinessState
    state_after: BusinessState
    accepted: bool
    counted: bool
    workload_count_after: int


@dataclass
class FsmRun:
    final_state: BusinessState
    workload_count: int
    trace: list[TraceRecord] = field(default_factory=list)

    @property
    def completions(self) -> list[TraceRecord]:
        return [r for r in self.trace if r.counted]


def run_fsm(
    occurrences: Iterable[EventOccurrence], table: TransitionTable
) -> FsmRun:
    """Fold the event stream from the start state, recording a full trace.

    Callers must deliver simultaneous events in canonical order (the event
    stream from identify_events already is).
    """
    state = START_STATE
    count = 0
    trace: list[TraceRecord] = []
    for occ in occurrences:
        result = step(state, occ.event, table)
        if result.counted:
            count += 1
        trace.append(
            TraceRecord(
                frame_index=occ.frame_index,
                timestamp=occ.timestamp,
                event=occ.event,
                state_before=state,
                state_after=result.state,
                accepted=result.accepted,
                counted=result.counted,
                workload_count_after=count,
            )
        )
        state = result.state
    return FsmRun(final_state=state, workload_count=count, trace=trace)


def run_events(events: Iterable[Event], table: TransitionTable) -> FsmRun:
    """run_fsm over bare events, with synthetic frame indices and timestamps."""
    return run_fsm(
        (EventOccurrence(e, i, float(i)) for i, e in enumerate(events)), table
    )


def serialize_fsm_trace(trace: Iterable[TraceRecord]) -> Iterator[str]:
    """Line-delimited trace records, one JSON object per step."""
    for r in trace:
        yield json.dumps(
            {
                "frame": r.frame_index,
                "t": r.timestamp,
                "event": r.event.value,
                "state_before": r.state_before.value,
                "state_after": r.state_after.value,
                "accepted": r.accepted,
                "counted": r.counted,
                "workload_count": r.workload_count_after,
            },
            sort_keys=True,
        )


def table_as_rows(table: TransitionTable) -> list[dict[str, str]]:
    """The table as sorted wire-code triples, for embedding in artifacts."""
    return [
        {"state": s.value, "event": e.value, "next": t.value}
        for (s, e), t in sorted(
            table.arcs.items(), key=lambda kv: (kv[0][0].value, kv[0][1].value)
        )
    ]
