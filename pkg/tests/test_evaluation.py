import csv
import json

import pytest

from robustrag.evaluation import (
    EvalRecord,
    EvalReport,
    RiskCoveragePoint,
    accuracy,
    best_gold_rank,
    emit_report,
    paired_rank_comparison,
    per_type_accuracy,
    read_records,
    recall_at_k,
    risk_coverage_curve,
    robustness_gap,
    write_records,
)


def _rec(qid, conf, correct, **kw):
    return EvalRecord(qid, kw.pop("condition", "biased"), conf, correct, **kw)


def test_accuracy_counts_abstain_as_wrong():
    recs = [_rec("a", 0.9, True), _rec("b", 0.8, True, abstained=True), _rec("c", 0.1, False), _rec("d", 0.5, True)]
    assert accuracy(recs) == 0.5
    with pytest.raises(ValueError):
        accuracy([])


def test_gap_examples():
    assert robustness_gap(45.8, 39.5) == pytest.approx(6.3)
    assert robustness_gap(53.9, 52.6) == pytest.approx(1.3)


def test_risk_coverage_example():
    recs = [_rec("a", 0.9, True), _rec("b", 0.8, False), _rec("c", 0.7, True), _rec("d", 0.6, False)]
    pts = risk_coverage_curve(recs, [0.25, 0.5, 0.75, 1.0])
    assert [p.selective_accuracy for p in pts] == pytest.approx([1.0, 0.5, 2 / 3, 0.5])
    assert [p.threshold for p in pts] == [0.9, 0.8, 0.7, 0.6]
    # 0.3 * 10 is 3.0000000000000004 in floats; still three records
    ten = [_rec(f"q{i}", 1 - i / 10, i < 3) for i in range(10)]
    assert risk_coverage_curve(ten, [0.3])[0].selective_accuracy == 1.0
    with pytest.raises(ValueError):
        risk_coverage_curve(recs, [0.0])
    with pytest.raises(ValueError):
        risk_coverage_curve([], [0.5])


def test_recall_and_paired():
    ranks = {"a": 1, "b": 3, "c": 12}
    assert recall_at_k(ranks, [1, 5, 10, 20]) == {1: 1 / 3, 5: 2 / 3, 10: 2 / 3, 20: 1.0}
    with pytest.raises(ValueError):
        recall_at_k({"a": None}, [1])
    assert best_gold_rank(["x", "g", "y"], lambda d: d == "g") == 2
    assert best_gold_rank(["x"], lambda d: False) is None
    out = paired_rank_comparison({"a": 3, "b": 1, "c": 2, "d": 5}, {"a": 1, "b": 1, "c": 4, "d": 2})
    assert out == {"win_b": 0.5, "tie": 0.25, "win_a": 0.25}
    with pytest.raises(ValueError):
        paired_rank_comparison({"a": 1}, {"b": 1})


def test_per_type():
    recs = [_rec("a", 1, True, ptype="I"), _rec("b", 1, False, ptype="I"), _rec("c", 1, True, ptype="III")]
    assert per_type_accuracy(recs) == {"I": 0.5, "III": 1.0}
    assert per_type_accuracy([_rec("x", 1, True)]) is None


def test_records_round_trip(tmp_path):
    recs = [_rec("a", 0.25, True, ptype="II", gold_ranks={"critic": 1, "bm25": 4}), _rec("b", 0.5, False)]
    write_records(recs, tmp_path / "r.jsonl")
    assert read_records(tmp_path / "r.jsonl") == recs


def test_report_emit(tmp_path):
    report = EvalReport(0.8, 0.7, robustness_gap(0.8, 0.7), recall_at_k={"critic": {1: 0.5, 5: 1.0}},
                        risk_coverage=[RiskCoveragePoint(0.5, 1.0, 0.9), RiskCoveragePoint(1.0, 0.7, 0.1)],
                        n_queries=10)
    files = emit_report(report, tmp_path)
    names = {p.name for p in files}
    assert {"report.json", "risk_coverage.csv", "recall_at_k.csv"} <= names
    d = json.loads((tmp_path / "report.json").read_text())
    assert "per_type_accuracy" not in d and "baseline" not in d
    assert EvalReport.from_dict(d) == report
    rows = list(csv.reader((tmp_path / "risk_coverage.csv").open()))
    assert rows[0] == ["coverage", "selective_accuracy"] and rows[1] == ["0.5", "1.0"]
    assert {p.name for p in emit_report(report, tmp_path / "c", format="csv")} == {"risk_coverage.csv", "recall_at_k.csv"}
    with pytest.raises(ValueError):
        emit_report(report, tmp_path, format="xml")
