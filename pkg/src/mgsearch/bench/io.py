"""CSV and JSON forms of profile reports."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from ..core import InvalidParameterError
from .config import ExperimentConfig
from .runner import ProfileReport, QualityReport, TrialResult

CSV_FIELDS = ("checkpoint_pct", "generated", "goals_mean", "goals_std", "trials")


def fmt(v: float) -> str:
    """Six significant digits; infinities as ``inf``."""
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.6g}"


def report_csv(report: ProfileReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for p, g, m, s in zip(report.checkpoint_pct, report.generated, report.means, report.stds):
        w.writerow([fmt(p), g, fmt(m), fmt(s), report.trials])
    return buf.getvalue()


def report_json(report: ProfileReport) -> str:
    data = {
        "config": report.config.to_dict() if report.config is not None else None,
        "checkpoints": [
            {"checkpoint_pct": p, "generated": g, "goals_mean": m, "goals_std": s, "trials": report.trials}
            for p, g, m, s in zip(report.checkpoint_pct, report.generated, report.means, report.stds)
        ],
        "trials": [
            {
                "seed": r.seed,
                "trial": r.trial,
                "generated": r.generated,
                "goals": r.goals,
                "total_goals": r.total_goals,
                "trace": [list(pt) for pt in r.trace],
            }
            for r in report.results
        ],
    }
    return json.dumps(data, indent=1) + "\n"


def quality_json(report: QualityReport) -> str:
    data = {
        "quality_target": report.quality_target,
        "mean_generated": report.mean_generated,
        "trials": [vars(r) for r in report.results],
    }
    return json.dumps(data, indent=1) + "\n"


def quality_csv(report: QualityReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("seed", "trial", "target", "total_goals", "generated", "reached"))
    for r in report.results:
        w.writerow([r.seed, r.trial, r.target, r.total_goals, r.generated, int(r.reached)])
    return buf.getvalue()


def _from_json(data: dict) -> ProfileReport:
    cps = data["checkpoints"]
    results = tuple(
        TrialResult(t["seed"], t["trial"], t["generated"], t["goals"], tuple(tuple(p) for p in t["trace"]), t.get("total_goals"))
        for t in data.get("trials", [])
    )
    cfg = data.get("config")
    return ProfileReport(
        checkpoint_pct=tuple(float(c["checkpoint_pct"]) for c in cps),
        generated=tuple(int(c["generated"]) for c in cps),
        means=tuple(float(c["goals_mean"]) for c in cps),
        stds=tuple(float(c["goals_std"]) for c in cps),
        results=results,
        config=ExperimentConfig.from_dict(cfg) if cfg else None,
    )


def _from_csv(text: str) -> ProfileReport:
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows or tuple(rows[0].keys()) != CSV_FIELDS:
        raise InvalidParameterError(f"expected CSV columns {','.join(CSV_FIELDS)}")
    return ProfileReport(
        checkpoint_pct=tuple(float(r["checkpoint_pct"]) for r in rows),
        generated=tuple(int(r["generated"]) for r in rows),
        means=tuple(float(r["goals_mean"]) for r in rows),
        stds=tuple(float(r["goals_std"]) for r in rows),
        results=(),
    )


def load_report(path) -> ProfileReport:
    """Read a report written as CSV or JSON (aggregates only for CSV)."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return _from_json(json.loads(text))
    return _from_csv(text)


def comparison_csv(baseline: ProfileReport, candidate: ProfileReport, factors) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("checkpoint_pct", "generated", "baseline_mean", "candidate_mean", "improvement_factor"))
    for p, g, a, b, f in zip(baseline.checkpoint_pct, baseline.generated, baseline.means, candidate.means, factors):
        w.writerow([fmt(p), g, fmt(a), fmt(b), fmt(f)])
    return buf.getvalue()
