"""Accuracy, robustness gap, risk-coverage, Recall@k and paired-rank metrics."""

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path


@dataclass
class EvalRecord:
    query_id: str
    condition: str               # "clean" or "biased"
    confidence: float
    correct: bool
    abstained: bool = False
    ptype: str = None
    gold_ranks: dict = None      # system -> rank of best gold doc, absent if none pooled

    def to_record(self):
        return {k: v for k, v in asdict(self).items() if v is not None}

    @classmethod
    def from_record(cls, rec):
        return cls(**rec)


@dataclass(frozen=True)
class RiskCoveragePoint:
    coverage: float
    selective_accuracy: float
    threshold: float


@dataclass
class EvalReport:
    acc_clean: float
    acc_biased: float
    robustness_gap: float
    per_type_accuracy: dict = None
    recall_at_k: dict = field(default_factory=dict)   # system -> {k: recall}
    paired_rank: dict = None
    risk_coverage: list = field(default_factory=list)
    baseline: dict = None
    n_queries: int = 0

    def to_dict(self):
        d = {
            "acc_clean": self.acc_clean,
            "acc_biased": self.acc_biased,
            "robustness_gap": self.robustness_gap,
            "recall_at_k": {s: {str(k): v for k, v in t.items()} for s, t in self.recall_at_k.items()},
            "risk_coverage": [asdict(p) for p in self.risk_coverage],
            "n_queries": self.n_queries,
        }
        for name in ("per_type_accuracy", "paired_rank", "baseline"):
            value = getattr(self, name)
            if value:
                d[name] = value
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(
            acc_clean=d["acc_clean"],
            acc_biased=d["acc_biased"],
            robustness_gap=d["robustness_gap"],
            per_type_accuracy=d.get("per_type_accuracy"),
            recall_at_k={s: {int(k): v for k, v in t.items()} for s, t in d.get("recall_at_k", {}).items()},
            paired_rank=d.get("paired_rank"),
            risk_coverage=[RiskCoveragePoint(**p) for p in d.get("risk_coverage", [])],
            baseline=d.get("baseline"),
            n_queries=d.get("n_queries", 0),
        )


def accuracy(records):
    """Fraction correct; abstentions count as wrong (full-coverage convention)."""
    if not records:
        raise ValueError("accuracy of an empty record list")
    return sum(1 for r in records if r.correct and not r.abstained) / len(records)


def robustness_gap(clean_acc, biased_acc):
    return clean_acc - biased_acc


def _by_confidence(records):
    return sorted(records, key=lambda r: (-r.confidence, r.query_id))


def risk_coverage_curve(records, grid):
    """Selective accuracy of the ``ceil(c * n)`` most confident records, per coverage ``c``."""
    if not grid:
        raise ValueError("empty coverage grid")
    if not records:
        raise ValueError("empty record list")
    ordered = _by_confidence(records)
    n = len(ordered)
    points = []
    for c in sorted(set(grid)):
        if not 0.0 < c <= 1.0:
            raise ValueError(f"coverage {c} outside (0, 1]")
        top = ordered[:max(1, math.ceil(c * n - 1e-12))]
        points.append(RiskCoveragePoint(c, accuracy(top), top[-1].confidence))
    return points


def recall_at_k(gold_ranks, ks):
    """Fraction of queries whose best gold doc sits at rank <= k.

    ``gold_ranks`` maps query id to that rank; queries without a pooled gold
    document must be filtered out beforehand (``None`` raises).
    """
    if not gold_ranks:
        raise ValueError("no queries to evaluate")
    missing = [q for q, r in gold_ranks.items() if r is None]
    if missing:
        raise ValueError(f"queries without a gold document in the pool: {missing[:5]}")
    n = len(gold_ranks)
    return {k: sum(1 for r in gold_ranks.values() if r <= k) / n for k in ks}


def best_gold_rank(ranked_doc_ids, has_gold):
    """1-based rank of the first gold-bearing doc, or None."""
    for rank, doc_id in enumerate(ranked_doc_ids, start=1):
        if has_gold(doc_id):
            return rank
    return None


def paired_rank_comparison(ranks_a, ranks_b):
    """Per-query comparison of gold ranks; ``win_b`` means system b ranked gold higher."""
    if set(ranks_a) != set(ranks_b):
        raise ValueError("systems were evaluated on different query sets")
    if not ranks_a:
        raise ValueError("no queries to compare")
    n = len(ranks_a)
    win_b = sum(1 for q in ranks_a if ranks_b[q] < ranks_a[q])
    win_a = sum(1 for q in ranks_a if ranks_b[q] > ranks_a[q])
    tie = n - win_a - win_b
    return {"win_b": win_b / n, "tie": tie / n, "win_a": win_a / n}


def per_type_accuracy(records):
    groups = {}
    for r in records:
        if r.ptype:
            groups.setdefault(r.ptype, []).append(r)
    return {t: accuracy(rs) for t, rs in sorted(groups.items())} or None


# -- files ----------------------------------------------------------------------


def write_records(records, path):
    with Path(path).open("w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r.to_record(), sort_keys=True) + "\n")


def read_records(path):
    with Path(path).open(encoding="utf-8") as fh:
        return [EvalRecord.from_record(json.loads(line)) for line in fh if line.strip()]


def emit_report(report, path, format="json", paired_pairs=None):
    """Write the report and its plot-ready CSV companions into ``path``.

    ``format="json"`` writes ``report.json`` plus the CSVs; ``format="csv"``
    writes only the CSVs. Returns the list of files written.
    """
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if format == "json":
        p = out / "report.json"
        p.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(p)
    elif format != "csv":
        raise ValueError(f"unknown report format {format!r}")

    p = out / "risk_coverage.csv"
    with p.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["coverage", "selective_accuracy"])
        for pt in report.risk_coverage:
            w.writerow([pt.coverage, pt.selective_accuracy])
    written.append(p)

    p = out / "recall_at_k.csv"
    with p.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["system", "k", "recall"])
        for system, table in sorted(report.recall_at_k.items()):
            for k, v in sorted(table.items()):
                w.writerow([system, k, v])
    written.append(p)

    if paired_pairs:
        p = out / "paired_ranks.csv"
        with p.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["query_id", "rank_a", "rank_b"])
            for qid, (ra, rb) in sorted(paired_pairs.items()):
                w.writerow([qid, ra, rb])
        written.append(p)
    return written
