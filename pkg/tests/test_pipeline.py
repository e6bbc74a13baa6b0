import dataclasses
import random

import pytest

from oracles import AUDIT_P, AUDIT_U, prediction_lines
from varisel import pipeline
from varisel.dataset import load_heart_failure
from varisel.errors import LearnerError, MetricError, PipelineError
from varisel.learners import import_predictions
from varisel.metrics import FairnessReport, PerformanceReport, abad, di, eoo, group_confusion, performance
from varisel.pipeline import (
    CandidateRecord,
    Decision,
    PipelineSettings,
    QualityCriterion,
    SelectionReport,
    TriggerRule,
    apply_triggers,
    audit,
    evaluate_criterion,
    load_settings,
    render_instance,
    run_pipeline,
)
from varisel.selector import AlgorithmKind as A

HEART = load_heart_failure()
QUEUE = [A.LINEAR_SVC, A.KNN, A.RBF_SVC, A.ENSEMBLE]


def settings_with(threshold, triggers=(), **kw):
    base = load_settings()
    return dataclasses.replace(base, criterion=QualityCriterion("f1", ">=", threshold), triggers=tuple(triggers), **kw)


# --- criterion -------------------------------------------------------------


def test_criterion_examples():
    crit = QualityCriterion("f1", "≥", 0.77)
    assert crit.comparator == ">="
    assert evaluate_criterion(PerformanceReport(f1=0.780), crit)
    assert not evaluate_criterion(PerformanceReport(f1=0.76), crit)
    assert evaluate_criterion(PerformanceReport(f1=0.5), QualityCriterion("f1", "≤", 0.6))
    with pytest.raises(PipelineError) as e:
        evaluate_criterion(PerformanceReport(), QualityCriterion("zzz", ">=", 0.1))
    assert e.value.code == "UNKNOWN_METRIC"


def test_criterion_absent_metric_is_false():
    trace = []
    assert not evaluate_criterion(PerformanceReport(f1=0.9), QualityCriterion("mcc", ">=", 0.0), trace)
    assert "undefined" in trace[0]


def test_criterion_validation():
    with pytest.raises(PipelineError):
        QualityCriterion("f1", ">=", float("nan"))
    with pytest.raises(PipelineError):
        QualityCriterion("f1", ">", 0.5)


# --- triggers --------------------------------------------------------------


def record(eoo_value=0.375, fair=True):
    f = FairnessReport(eoo_value, 1.0714, 3.0) if fair else None
    return CandidateRecord(A.LINEAR_SVC, PerformanceReport(f1=0.8), f, Decision.ACCEPTED)


def test_trigger_flag():
    decision, trace = apply_triggers(record(), [TriggerRule("eoo > 0.2", "FLAG", 1)])
    assert decision is Decision.FLAGGED
    assert trace == ["trigger [1] eoo > 0.2: eoo=0.375 → FLAG"]


def test_no_triggers_accepts():
    decision, trace = apply_triggers(record(), [])
    assert decision is Decision.ACCEPTED and trace


def test_first_by_order_wins():
    rules = [TriggerRule("abad >= 3", "ADVANCE_QUEUE", 2), TriggerRule("di > 1", "FLAG", 1)]
    assert apply_triggers(record(), rules)[0] is Decision.FLAGGED


def test_absent_field_is_skipped():
    rules = [TriggerRule("eoo > 0.2", "ADVANCE_QUEUE", 1), TriggerRule("f1 > 0.5", "FLAG", 2)]
    decision, trace = apply_triggers(record(fair=False), rules)
    assert decision is Decision.FLAGGED
    assert "absent" in trace[0]


def test_trigger_rule_validation():
    with pytest.raises(PipelineError) as e:
        TriggerRule("zzz > 1", "FLAG")
    assert e.value.code == "UNKNOWN_FIELD"
    with pytest.raises(PipelineError) as e:
        TriggerRule("eoo >>> 1", "FLAG")
    assert e.value.code == "BAD_CONDITION"
    with pytest.raises(PipelineError) as e:
        TriggerRule("eoo > 1", "EXPLODE")
    assert e.value.code == "BAD_ACTION"
    rule = TriggerRule("eoo ≥ -0.5", "ACCEPT", 3)
    assert rule.parts == ("eoo", ">=", -0.5)
    assert TriggerRule.from_dict(rule.to_dict()) == rule


# --- run -------------------------------------------------------------------


def test_run_exhausted():
    report = run_pipeline(HEART, settings_with(1.01))
    assert report.outcome.status == "EXHAUSTED"
    assert [c.algorithm for c in report.candidates] == QUEUE
    assert all(c.decision is Decision.REJECTED_QUALITY for c in report.candidates)
    assert report.configuration is None


def test_run_accepts_first():
    report = run_pipeline(HEART, settings_with(0.0))
    assert str(report.outcome) == "ACCEPTED(LINEAR_SVC)"
    assert len(report.candidates) == 1 and report.candidates[0].decision is Decision.ACCEPTED
    assert "LinearSVC" in report.configuration and "F1" in report.configuration


def test_run_with_default_triggers_flags():
    report = run_pipeline(HEART, dataclasses.replace(load_settings(), criterion=QualityCriterion("f1", ">=", 0.0)))
    cand = report.candidates[0]
    assert cand.fairness is not None
    assert cand.decision is (Decision.FLAGGED if abs(cand.fairness.eoo) > 0.2 else Decision.ACCEPTED)
    assert report.outcome.algorithm is A.LINEAR_SVC


def test_run_is_deterministic():
    s = load_settings()
    assert run_pipeline(HEART, s).to_json() == run_pipeline(HEART, s).to_json()


def test_report_round_trip():
    for threshold in (0.0, 0.6, 1.01):
        report = run_pipeline(HEART, settings_with(threshold))
        text = report.to_json()
        back = SelectionReport.from_json(text)
        assert back == report
        assert back.to_json() == text
    with pytest.raises(PipelineError):
        SelectionReport.from_json("{}")


def test_report_keys():
    import json

    d = json.loads(run_pipeline(HEART, load_settings()).to_json())
    assert {"profile", "queue", "candidates", "outcome", "seed", "tool_version"} <= set(d)
    assert "time" not in json.dumps(d).lower()


def test_advance_queue_trigger():
    rules = [TriggerRule("f1 > 0", "ADVANCE_QUEUE", 1)]
    report = run_pipeline(HEART, settings_with(0.0, rules))
    assert report.outcome.status == "EXHAUSTED"
    assert [c.decision for c in report.candidates] == [Decision.REJECTED_TRIGGER] * 4


def test_failed_trainer_is_rejected(monkeypatch):
    real = pipeline.train

    def flaky(spec, *args, **kw):
        if spec.kind is A.LINEAR_SVC:
            raise LearnerError("SINGLE_CLASS_TRAINING_SET", "simulated")
        return real(spec, *args, **kw)

    monkeypatch.setattr(pipeline, "train", flaky)
    report = run_pipeline(HEART, settings_with(0.0))
    first, second = report.candidates
    assert first.decision is Decision.REJECTED_QUALITY and "simulated" in first.rule_trace[0]
    assert second.algorithm is A.KNN and report.outcome.algorithm is A.KNN


def test_monotone_in_threshold():
    positions = []
    for threshold in [0.0, 0.3, 0.5, 0.6, 0.61, 0.65, 0.7, 1.01]:
        report = run_pipeline(HEART, settings_with(threshold))
        assert len(report.candidates) <= 4
        positions.append(len(report.candidates) if report.outcome.status == "ACCEPTED" else 99)
    assert positions == sorted(positions)


def test_no_sensitive_column_means_no_fairness():
    ds = dataclasses.replace(HEART, sensitive=None)
    report = run_pipeline(ds, settings_with(0.0, sensitive=None))
    assert report.candidates[0].fairness is None
    assert "EOO" not in report.configuration


def test_pipeline_input_errors():
    with pytest.raises(PipelineError) as e:
        run_pipeline(HEART, dataclasses.replace(load_settings(), criterion=QualityCriterion("zzz", ">=", 0)))
    assert e.value.code == "UNKNOWN_METRIC"
    with pytest.raises(PipelineError):
        PipelineSettings(test_fraction=1.5)


# --- audit and rendering ---------------------------------------------------


def write(tmp_path, text):
    p = tmp_path / "preds.csv"
    p.write_text(text, encoding="utf-8")
    return p


def test_audit_fixture(tmp_path):
    perf, fair = audit(write(tmp_path, prediction_lines(AUDIT_P, AUDIT_U)), "1")
    assert fair.eoo == 0.375
    assert fair.di == pytest.approx(15 / 14, abs=1e-15)
    assert fair.abad == 3
    assert perf.accuracy == pytest.approx(15 / 50)


def test_audit_symmetric(tmp_path):
    m = {"tp": 4, "fp": 2, "fn": 1, "tn": 3}
    _, fair = audit(write(tmp_path, prediction_lines(m, m)), "1")
    assert fair.eoo == 0 and fair.di == 1


def test_audit_single_group(tmp_path):
    with pytest.raises(MetricError) as e:
        audit(write(tmp_path, prediction_lines({"tp": 2, "tn": 2}, {})), "1")
    assert e.value.code == "EMPTY_GROUP"


@pytest.mark.parametrize("seed", range(20))
def test_audit_equals_manual_composition(tmp_path, seed):
    rng = random.Random(seed)
    P = {k: rng.randint(0, 12) for k in ("tp", "fp", "fn", "tn")}
    U = {k: rng.randint(0, 12) for k in ("tp", "fp", "fn", "tn")}
    P["tp"] += 1
    U["tp"] += 1
    path = write(tmp_path, prediction_lines(P, U, protected="M", unprotected="F"))
    perf, fair = audit(path, "M")
    g = group_confusion(import_predictions(path), "M")
    assert perf == performance(g.protected + g.unprotected)
    assert (fair.eoo, fair.di, fair.abad) == (eoo(g), di(g), abad(g))


def test_render_instance():
    report = run_pipeline(HEART, settings_with(0.0))
    dot = render_instance(report)
    assert dot == render_instance(SelectionReport.from_json(report.to_json()))
    filled = {line.split()[0].strip('"') for line in dot.splitlines() if "fillcolor" in line and "->" not in line}
    assert {"LinearSVC", "Classification", "F1"} <= filled
    with pytest.raises(PipelineError) as e:
        render_instance(run_pipeline(HEART, settings_with(1.01)))
    assert e.value.code == "NOT_ACCEPTED"
