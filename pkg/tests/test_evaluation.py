"""Matching, metrics, aggregation, truth parsing, and table rendering.

match_workloads is greedy and chronological; the property test checks it
against an exhaustive maximum-matching search, which is the whole reason the
greedy shortcut is trustworthy.
"""
from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import best_matching
from excount.evaluation import (
    AggregateReport,
    EvalReport,
    MatchConfig,
    WorkloadRecord,
    aggregate_reports,
    compute_metrics,
    comparison_csv,
    evaluate,
    f1_score,
    load_truth,
    match_workloads,
    render_comparison_table,
    serialize_truth,
    totals_csv,
)


def records(*times: float) -> list[WorkloadRecord]:
    return [WorkloadRecord(t) for t in times]


def test_exact_match():
    tp, fake, missing = match_workloads(records(10, 20), records(10, 20))
    assert (tp, fake, missing) == (2, 0, 0)


def test_within_window_matches():
    cfg = MatchConfig(tolerance_seconds=5)
    tp, fake, missing = match_workloads(records(10, 11), records(12,), cfg)
    assert (tp, fake, missing) == (1, 1, 0)


def test_outside_window_is_fake_and_missing():
    cfg = MatchConfig(tolerance_seconds=5)
    tp, fake, missing = match_workloads(records(0), records(100), cfg)
    assert (tp, fake, missing) == (0, 1, 1)


def test_each_truth_matched_at_most_once():
    cfg = MatchConfig(tolerance_seconds=10)
    tp, fake, missing = match_workloads(records(10, 12, 14), records(10,), cfg)
    assert (tp, fake, missing) == (1, 2, 0)


def test_empty_sides():
    assert match_workloads([], []) == (0, 0, 0)
    assert match_workloads(records(5), []) == (0, 1, 0)
    assert match_workloads([], records(5)) == (0, 0, 1)


def test_unsorted_inputs_rejected():
    with pytest.raises(ValueError, match="not sorted"):
        match_workloads(records(10, 5), [])
    with pytest.raises(ValueError, match="not sorted"):
        match_workloads([], records(10, 5))


def test_count_mode_ignores_timing():
    cfg = MatchConfig(mode="count")
    tp, fake, missing = match_workloads(records(0, 1, 2), records(500, 900), cfg)
    assert (tp, fake, missing) == (2, 1, 0)


def test_match_config_validation():
    with pytest.raises(ValueError):
        MatchConfig(tolerance_seconds=0)
    with pytest.raises(ValueError):
        MatchConfig(mode="fuzzy")


times = st.lists(
    st.integers(min_value=0, max_value=50).map(float), min_size=0, max_size=6
).map(sorted)


@given(times, times, st.sampled_from([1.0, 5.0, 12.0, 30.0]))
@settings(max_examples=400)
def test_greedy_matching_is_maximum(pred_times, truth_times, window):
    cfg = MatchConfig(tolerance_seconds=window)
    tp, fake, missing = match_workloads(
        records(*pred_times), records(*truth_times), cfg
    )
    assert tp == best_matching(tuple(pred_times), tuple(truth_times), window)
    assert fake == len(pred_times) - tp
    assert missing == len(truth_times) - tp


def test_f1_is_the_harmonic_mean():
    assert f1_score(1.0, 1.0) == 1.0
    assert f1_score(0.0, 0.0) == 0.0
    assert f1_score(0.5, 1.0) == pytest.approx(2 / 3)


def test_metrics_conventions_for_empty_sides():
    report = compute_metrics(0, 0, 0)
    assert (report.precision, report.recall, report.f1) == (1.0, 1.0, 1.0)
    nothing_counted = compute_metrics(0, 0, 4)
    assert nothing_counted.precision == 1.0
    assert nothing_counted.recall == 0.0
    assert nothing_counted.f1 == 0.0
    nothing_true = compute_metrics(0, 3, 0)
    assert nothing_true.precision == 0.0
    assert nothing_true.recall == 1.0


def test_report_identities_enforced():
    with pytest.raises(ValueError):
        EvalReport(
            truth_count=2, counted=2, true_positives=1, fake=0, missing=1,
            precision=0.5, recall=0.5, f1=0.5,
        )
    with pytest.raises(ValueError):
        compute_metrics(-1, 0, 0)


@given(
    st.integers(min_value=0, max_value=40),
    st.integers(min_value=0, max_value=40),
    st.integers(min_value=0, max_value=40),
)
def test_metrics_ranges_and_identities(tp, fake, missing):
    report = compute_metrics(tp, fake, missing)
    assert report.counted == tp + fake
    assert report.truth_count == tp + missing
    assert 0.0 <= report.f1 <= 1.0
    # harmonic mean sits between precision and recall (up to float rounding)
    low = min(report.precision, report.recall) - 1e-12
    high = max(report.precision, report.recall) + 1e-12
    assert low <= report.f1 <= high or report.f1 == 0.0


def test_evaluate_end_to_end():
    report = evaluate(records(9, 40), records(10, 200), MatchConfig(tolerance_seconds=5))
    assert report.true_positives == 1
    assert report.fake == 1
    assert report.missing == 1
    assert report.precision == 0.5
    assert report.recall == 0.5


def test_aggregate_micro_pools_counts_and_means_average_metrics():
    a = compute_metrics(3, 1, 0)  # P .75  R 1
    b = compute_metrics(1, 0, 1)  # P 1    R .5
    agg = aggregate_reports([a, b])
    assert isinstance(agg, AggregateReport)
    assert agg.videos == 2
    assert agg.micro.true_positives == 4
    assert agg.micro.precision == 4 / 5
    assert agg.mean_precision == pytest.approx((0.75 + 1.0) / 2)
    assert agg.mean_truth == pytest.approx((3 + 2) / 2)
    with pytest.raises(ValueError):
        aggregate_reports([])


def test_load_truth_groups_and_sorts():
    lines = [
        json.dumps({"video": "b", "t": 9.0}),
        json.dumps({"video": "a", "t": 5.0}),
        json.dumps({"video": "a", "t": 2.0}),
    ]
    truth = load_truth(lines)
    assert sorted(truth) == ["a", "b"]
    assert [r.completion_time for r in truth["a"]] == [2.0, 5.0]
    assert truth["a"][0].source == "ground_truth"


def test_load_truth_skips_leading_header():
    lines = [json.dumps({"header": {"seed": 1}}), json.dumps({"video": "a", "t": 1.0})]
    assert list(load_truth(lines)) == ["a"]


@pytest.mark.parametrize(
    "line, message",
    [
        ("nope", "line 1: invalid JSON"),
        (json.dumps({"video": "", "t": 1.0}), "bad video id"),
        (json.dumps({"video": "a"}), "bad time"),
        (json.dumps({"video": "a", "t": True}), "bad time"),
    ],
)
def test_load_truth_rejects_bad_lines(line, message):
    with pytest.raises(ValueError, match=message):
        load_truth([line])


def test_truth_round_trip():
    truth = {"a": records(1.0, 2.0), "b": records(3.5)}
    again = load_truth(serialize_truth(truth))
    assert {v: [r.completion_time for r in rs] for v, rs in again.items()} == {
        "a": [1.0, 2.0],
        "b": [3.5],
    }


def sample_rows():
    return [
        ("v1", {"fsm": compute_metrics(3, 0, 1), "loose": compute_metrics(4, 2, 0)}),
        ("v2", {"fsm": compute_metrics(5, 1, 0), "loose": compute_metrics(5, 0, 0)}),
    ]


def test_table_layout_has_the_standard_columns():
    text = render_comparison_table(sample_rows(), ["fsm", "loose"], match_label="x")
    lines = text.splitlines()
    header = lines[0]
    for column in ("NO.", "Tr", "fsm CT", "P", "R", "F1", "loose CT"):
        assert column in header
    assert lines[-2].lstrip().startswith("AVG")
    assert lines[-1] == "matching: x"
    v1 = next(line for line in lines if line.lstrip().startswith("v1"))
    assert "0.75" in v1  # fsm recall 3/4
    assert "0.67" in v1  # loose precision 4/6


def test_avg_row_uses_arithmetic_means():
    text = render_comparison_table(sample_rows(), ["fsm"])
    avg = next(line for line in text.splitlines() if line.lstrip().startswith("AVG"))
    # truth counts 4 and 5 -> 4.5; counted 3 and 6 -> 4.5
    assert "4.5" in avg
    # precisions 1.0 and 5/6 -> 0.92
    assert "0.92" in avg


def test_comparison_csv_full_precision():
    text = comparison_csv(sample_rows(), ["fsm", "loose"])
    lines = text.strip().splitlines()
    assert lines[0] == "video,method,truth,counted,tp,fake,missing,precision,recall,f1"
    assert len(lines) == 5
    assert lines[1].startswith("v1,fsm,4,3,3,0,1,1.0,0.75,")


def test_totals_csv():
    text = totals_csv({"fsm": (1, 2), "loose": (0, 5)})
    assert text.strip().splitlines() == ["method,fake,missing", "fsm,1,2", "loose,0,5"]
