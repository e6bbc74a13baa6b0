"""Selection pipeline: split, profile, queue, train/evaluate in queue order,
fairness audit, trigger rules, and a deterministic JSON report."""

from __future__ import annotations

import enum
import json
import logging
import math
import operator
import re
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

from . import __version__
from .dataset import DatasetProfile, TabularDataset, default_positive_label, profile, sort_labels, stratified_split
from .errors import DataError, PipelineError, VariselError
from .fm import Configuration, to_dot
from .learners import TRAINABLE, LearnerSpec, PredictionEntry, PredictionSet, import_predictions, predict, train
from .metrics import (
    FAIRNESS_METRICS,
    PERFORMANCE_METRICS,
    FairnessReport,
    PerformanceReport,
    confusion,
    fairness,
    group_confusion,
    performance,
    round_sig,
)
from .selector import AlgorithmKind, MethodQueue, SelectorThresholds, combined_model, recommend, to_configuration

log = logging.getLogger(__name__)

DIGITS = 10
REPORT_FIELDS = PERFORMANCE_METRICS + FAIRNESS_METRICS

_COMPARE = {
    ">": operator.gt,
    ">=": operator.ge,
    "<": operator.lt,
    "<=": operator.le,
    "==": operator.eq,
    "!=": operator.ne,
}
_ALIASES = {"≥": ">=", "≤": "<=", "≠": "!="}


def _comparator(text: str) -> str:
    op = _ALIASES.get(text.strip(), text.strip())
    if op not in _COMPARE:
        raise PipelineError("BAD_COMPARATOR", f"unknown comparator {text!r}")
    return op


def _finite(value: Any, what: str) -> float:
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise PipelineError("BAD_THRESHOLD", f"{what} must be a number, got {value!r}") from None
    if not math.isfinite(x):
        raise PipelineError("BAD_THRESHOLD", f"{what} must be finite, got {value!r}")
    return x


# --- criterion and triggers -------------------------------------------------


@dataclass(frozen=True)
class QualityCriterion:
    """``metric comparator threshold`` over a PerformanceReport field."""

    metric: str = "f1"
    comparator: str = ">="
    threshold: float = 0.77

    def __post_init__(self):
        op = _comparator(self.comparator)
        if op not in (">=", "<="):
            raise PipelineError("BAD_COMPARATOR", f"a quality criterion uses >= or <=, got {self.comparator!r}")
        object.__setattr__(self, "comparator", op)
        object.__setattr__(self, "threshold", _finite(self.threshold, "criterion threshold"))

    def __str__(self) -> str:
        return f"{self.metric} {self.comparator} {self.threshold:g}"

    def to_dict(self) -> dict:
        return {"metric": self.metric, "comparator": self.comparator, "threshold": self.threshold}

    @classmethod
    def from_dict(cls, d: Mapping) -> "QualityCriterion":
        return cls(d["metric"], d.get("comparator", ">="), d["threshold"])


def evaluate_criterion(report: PerformanceReport, criterion: QualityCriterion, trace: list[str] | None = None) -> bool:
    """True iff the metric is present and satisfies the comparison.

    An absent (undefined) metric fails the criterion; the reason is appended
    to ``trace`` when one is given.
    """
    if criterion.metric not in PERFORMANCE_METRICS:
        raise PipelineError("UNKNOWN_METRIC", f"{criterion.metric!r} is not one of {', '.join(PERFORMANCE_METRICS)}")
    value = getattr(report, criterion.metric)
    if value is None:
        if trace is not None:
            trace.append(f"criterion {criterion}: {criterion.metric} undefined → fail")
        return False
    ok = _COMPARE[criterion.comparator](value, criterion.threshold)
    if trace is not None:
        trace.append(f"criterion {criterion}: {criterion.metric}={value:.{DIGITS}g} → {'pass' if ok else 'fail'}")
    return ok


class TriggerAction(str, enum.Enum):
    ADVANCE_QUEUE = "ADVANCE_QUEUE"
    FLAG = "FLAG"
    ACCEPT = "ACCEPT"


_CONDITION = re.compile(r"^\s*([A-Za-z_]\w*)\s*(>=|<=|!=|==|>|<|≥|≤|≠)\s*(\S+)\s*$")


@dataclass(frozen=True)
class TriggerRule:
    """``condition`` like ``"eoo > 0.2"`` over any performance or fairness field."""

    condition: str
    action: TriggerAction
    order: int = 0

    def __post_init__(self):
        m = _CONDITION.match(self.condition)
        if not m:
            raise PipelineError("BAD_CONDITION", f"cannot parse trigger condition {self.condition!r}")
        name, op, value = m.groups()
        if name not in REPORT_FIELDS:
            raise PipelineError("UNKNOWN_FIELD", f"trigger references unknown field {name!r}")
        _finite(value, f"trigger {self.condition!r}")
        try:
            object.__setattr__(self, "action", TriggerAction(self.action))
        except ValueError:
            raise PipelineError("BAD_ACTION", f"unknown trigger action {self.action!r}") from None
        if isinstance(self.order, bool) or not isinstance(self.order, int):
            raise PipelineError("BAD_ORDER", f"trigger order must be an integer, got {self.order!r}")

    @property
    def parts(self) -> tuple[str, str, float]:
        name, op, value = _CONDITION.match(self.condition).groups()
        return name, _comparator(op), float(value)

    def to_dict(self) -> dict:
        return {"condition": self.condition, "action": self.action.value, "order": self.order}

    @classmethod
    def from_dict(cls, d: Mapping) -> "TriggerRule":
        return cls(d["condition"], d["action"], d.get("order", 0))


class Decision(str, enum.Enum):
    ACCEPTED = "ACCEPTED"
    REJECTED_QUALITY = "REJECTED_QUALITY"
    REJECTED_TRIGGER = "REJECTED_TRIGGER"
    FLAGGED = "FLAGGED"

    @property
    def stops(self) -> bool:
        return self in (Decision.ACCEPTED, Decision.FLAGGED)


_ACTION_DECISION = {
    TriggerAction.ADVANCE_QUEUE: Decision.REJECTED_TRIGGER,
    TriggerAction.FLAG: Decision.FLAGGED,
    TriggerAction.ACCEPT: Decision.ACCEPTED,
}


@dataclass(frozen=True)
class CandidateRecord:
    algorithm: AlgorithmKind
    performance: PerformanceReport
    fairness: FairnessReport | None
    decision: Decision
    rule_trace: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm.value,
            "performance": {k: round_sig(v, DIGITS) for k, v in self.performance.to_dict().items()},
            "fairness": None
            if self.fairness is None
            else {k: round_sig(v, DIGITS) for k, v in self.fairness.to_dict().items()},
            "decision": self.decision.value,
            "rule_trace": list(self.rule_trace),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "CandidateRecord":
        return cls(
            AlgorithmKind(d["algorithm"]),
            PerformanceReport.from_dict(d["performance"]),
            None if d.get("fairness") is None else FairnessReport.from_dict(d["fairness"]),
            Decision(d["decision"]),
            tuple(d.get("rule_trace", ())),
        )


def _field_value(record: CandidateRecord, name: str) -> float | None:
    if name in PERFORMANCE_METRICS:
        return getattr(record.performance, name)
    if record.fairness is None:
        return None
    return getattr(record.fairness, name)


def apply_triggers(record: CandidateRecord, rules: Sequence[TriggerRule]) -> tuple[Decision, list[str]]:
    """First matching rule by ``order`` decides; no match means ACCEPTED.

    Rules whose field is absent on ``record`` are skipped. Every evaluation
    adds a line to the returned trace.
    """
    trace: list[str] = []
    for rule in sorted(rules, key=lambda r: r.order):
        name, op, bound = rule.parts
        value = _field_value(record, name)
        if value is None:
            trace.append(f"trigger [{rule.order}] {rule.condition}: {name} absent → skipped")
            continue
        if _COMPARE[op](value, bound):
            trace.append(f"trigger [{rule.order}] {rule.condition}: {name}={value:.{DIGITS}g} → {rule.action.value}")
            return _ACTION_DECISION[rule.action], trace
        trace.append(f"trigger [{rule.order}] {rule.condition}: {name}={value:.{DIGITS}g} → no match")
    trace.append("no trigger fired → ACCEPT")
    return Decision.ACCEPTED, trace


# --- settings ---------------------------------------------------------------


@dataclass(frozen=True)
class PipelineSettings:
    criterion: QualityCriterion = field(default_factory=QualityCriterion)
    triggers: tuple[TriggerRule, ...] = ()
    thresholds: SelectorThresholds = field(default_factory=SelectorThresholds)
    seed: int = 0
    protected_value: str | None = None
    test_fraction: float = 0.2
    positive_label: str | None = None
    target: str | None = None
    sensitive: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "triggers", tuple(self.triggers))
        if not 0 < float(self.test_fraction) < 1:
            raise PipelineError("BAD_SETTINGS", f"test_fraction must lie in (0, 1), got {self.test_fraction!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise PipelineError("BAD_SETTINGS", f"seed must be an integer, got {self.seed!r}")

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "sensitive": self.sensitive,
            "protected_value": self.protected_value,
            "positive_label": self.positive_label,
            "seed": self.seed,
            "test_fraction": self.test_fraction,
            "criterion": self.criterion.to_dict(),
            "triggers": [r.to_dict() for r in self.triggers],
            "thresholds": self.thresholds.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "PipelineSettings":
        try:
            return cls(
                criterion=QualityCriterion.from_dict(d["criterion"]) if "criterion" in d else QualityCriterion(),
                triggers=tuple(TriggerRule.from_dict(r) for r in d.get("triggers", ())),
                thresholds=SelectorThresholds.from_dict(d["thresholds"]) if "thresholds" in d else SelectorThresholds(),
                seed=d.get("seed", 0),
                protected_value=d.get("protected_value"),
                test_fraction=d.get("test_fraction", 0.2),
                positive_label=d.get("positive_label"),
                target=d.get("target"),
                sensitive=d.get("sensitive"),
            )
        except (KeyError, TypeError) as exc:
            raise PipelineError("BAD_SETTINGS", f"malformed settings: {exc}") from None


def default_settings_path() -> Path:
    return Path(str(resources.files("varisel").joinpath("settings", "default.json")))


def load_settings(path: str | Path | None = None) -> PipelineSettings:
    """Read a settings JSON file (the bundled defaults when ``path`` is None)."""
    path = default_settings_path() if path is None else Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise PipelineError("BAD_SETTINGS", f"{path}: {exc}") from None
    return PipelineSettings.from_dict(data)


# --- report -----------------------------------------------------------------


@dataclass(frozen=True)
class Outcome:
    status: str  # "ACCEPTED" or "EXHAUSTED"
    algorithm: AlgorithmKind | None = None

    def __post_init__(self):
        if self.status not in ("ACCEPTED", "EXHAUSTED"):
            raise ValueError(f"unknown outcome {self.status!r}")
        if (self.status == "ACCEPTED") != (self.algorithm is not None):
            raise ValueError("an ACCEPTED outcome names exactly one algorithm")

    def __str__(self) -> str:
        return f"ACCEPTED({self.algorithm.value})" if self.algorithm else "EXHAUSTED"


@dataclass(frozen=True)
class SelectionReport:
    profile: DatasetProfile
    queue: MethodQueue
    candidates: tuple[CandidateRecord, ...]
    outcome: Outcome
    seed: int
    configuration: tuple[str, ...] | None = None
    tool_version: str = __version__
    settings: Mapping[str, Any] | None = None
    notes: tuple[str, ...] = ()

    @property
    def accepted(self) -> CandidateRecord | None:
        return next((c for c in self.candidates if c.decision.stops), None)

    def to_dict(self) -> dict:
        prof = self.profile.to_dict()
        prof["positive_fraction"] = round_sig(prof["positive_fraction"], DIGITS)
        return {
            "tool_version": self.tool_version,
            "seed": self.seed,
            "settings": self.settings,
            "profile": prof,
            "queue": self.queue.to_dict(),
            "candidates": [c.to_dict() for c in self.candidates],
            "outcome": {
                "status": self.outcome.status,
                "algorithm": self.outcome.algorithm.value if self.outcome.algorithm else None,
            },
            "configuration": list(self.configuration) if self.configuration is not None else None,
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "SelectionReport":
        out = d["outcome"]
        return cls(
            profile=DatasetProfile.from_dict(d["profile"]),
            queue=MethodQueue.from_dict(d["queue"]),
            candidates=tuple(CandidateRecord.from_dict(c) for c in d["candidates"]),
            outcome=Outcome(out["status"], AlgorithmKind(out["algorithm"]) if out.get("algorithm") else None),
            seed=d["seed"],
            configuration=tuple(d["configuration"]) if d.get("configuration") is not None else None,
            tool_version=d["tool_version"],
            settings=d.get("settings"),
            notes=tuple(d.get("notes", ())),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "SelectionReport":
        try:
            return cls.from_dict(json.loads(text))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise PipelineError("BAD_REPORT", f"cannot parse report: {exc}") from None

    def to_text(self) -> str:
        lines = [f"outcome: {self.outcome}", f"seed: {self.seed}", "queue:"]
        lines += [f"  {a.value}: {why}" for a, why in zip(self.queue.items, self.queue.rationale)]
        for c in self.candidates:
            perf = ", ".join(f"{k}={v:.4g}" for k, v in c.performance.to_dict().items() if v is not None)
            lines.append(f"candidate {c.algorithm.value}: {c.decision.value}")
            if perf:
                lines.append(f"  performance: {perf}")
            if c.fairness is not None:
                fair = ", ".join(f"{k}={'n/a' if v is None else format(v, '.4g')}" for k, v in c.fairness.to_dict().items())
                lines.append(f"  fairness: {fair}")
            lines += [f"  | {t}" for t in c.rule_trace]
        lines += [f"note: {n}" for n in self.notes]
        if self.configuration:
            lines.append("configuration: " + " ".join(self.configuration))
        return "\n".join(lines) + "\n"


# --- orchestration ----------------------------------------------------------


def _predictions(model, test: TabularDataset, labels: Sequence[str], positive: str) -> PredictionSet:
    guesses = predict(model, test)
    groups = test.groups() if test.sensitive is not None else [""] * len(test)
    entries = [PredictionEntry(rid, t, p, g) for rid, t, p, g in zip(test.row_ids, test.labels(), guesses, groups)]
    return PredictionSet.build(entries, positive, labels)


def _evaluate(
    item: AlgorithmKind,
    train_set: TabularDataset,
    test_set: TabularDataset,
    labels: Sequence[str],
    positive: str,
    settings: PipelineSettings,
) -> CandidateRecord:
    trace: list[str] = []
    try:
        model = train(LearnerSpec(item, seed=settings.seed), train_set, labels)
        preds = _predictions(model, test_set, labels, positive)
    except VariselError as exc:
        trace.append(f"training failed: {exc}")
        return CandidateRecord(item, PerformanceReport(), None, Decision.REJECTED_QUALITY, tuple(trace))

    perf = performance(confusion(preds)).rounded(DIGITS)
    fair = None
    if test_set.sensitive is not None and settings.protected_value is not None:
        try:
            fair = fairness(group_confusion(preds, settings.protected_value)).rounded(DIGITS)
        except VariselError as exc:
            trace.append(f"fairness not computed: {exc}")

    if not evaluate_criterion(perf, settings.criterion, trace):
        return CandidateRecord(item, perf, fair, Decision.REJECTED_QUALITY, tuple(trace))
    record = CandidateRecord(item, perf, fair, Decision.ACCEPTED, ())
    decision, fired = apply_triggers(record, settings.triggers)
    return CandidateRecord(item, perf, fair, decision, tuple(trace + fired))


def run_pipeline(dataset: TabularDataset, settings: PipelineSettings | None = None) -> SelectionReport:
    """Try the recommended learners in queue order until one is accepted.

    The profile describes the whole dataset; training and evaluation use a
    seeded stratified split. A FLAGGED candidate stops the run like an
    accepted one and becomes the outcome.
    """
    settings = settings or PipelineSettings()
    if settings.criterion.metric not in PERFORMANCE_METRICS:
        raise PipelineError("UNKNOWN_METRIC", f"{settings.criterion.metric!r} is not a performance metric")
    if dataset.target is None:
        raise DataError("UNLABELED", "the pipeline needs a target column")
    labels = sort_labels(set(dataset.labels()))
    if len(labels) != 2:
        raise DataError("NON_BINARY_TARGET", f"binary target required, found {len(labels)} class(es)")
    positive = settings.positive_label if settings.positive_label is not None else default_positive_label(labels)
    if positive not in labels:
        raise DataError("UNKNOWN_POSITIVE_LABEL", f"{positive!r} is not one of {labels}")

    started = time.perf_counter()
    train_set, test_set = stratified_split(dataset, settings.test_fraction, settings.seed, labels)
    prof = profile(dataset, thresholds=settings.thresholds, positive_label=positive)
    prof = DatasetProfile.from_dict({**prof.to_dict(), "positive_fraction": round_sig(prof.positive_fraction, DIGITS)})
    queue = recommend(prof, settings.thresholds)

    candidates: list[CandidateRecord] = []
    notes: list[str] = [f"split: {len(train_set)} train / {len(test_set)} test rows, positive label {positive!r}"]
    winner: CandidateRecord | None = None
    for item in queue:
        if item.terminal:
            notes.append(f"reached {item.value}")
            break
        if item not in TRAINABLE:
            notes.append(f"{item.value} has no trainer; skipped")
            continue
        t0 = time.perf_counter()
        record = _evaluate(item, train_set, test_set, labels, positive, settings)
        log.info("%s: %s in %.3fs", item.value, record.decision.value, time.perf_counter() - t0)
        candidates.append(record)
        if record.decision.stops:
            winner = record
            break

    configuration = None
    if winner is not None:
        metrics = [settings.criterion.metric]
        if winner.fairness is not None:
            metrics += list(FAIRNESS_METRICS)
        configuration = to_configuration(winner.algorithm, prof, metrics, settings.thresholds).sort_key()
        outcome = Outcome("ACCEPTED", winner.algorithm)
    else:
        outcome = Outcome("EXHAUSTED")
    log.info("pipeline finished in %.3fs: %s", time.perf_counter() - started, outcome)
    return SelectionReport(
        profile=prof,
        queue=queue,
        candidates=tuple(candidates),
        outcome=outcome,
        seed=settings.seed,
        configuration=configuration,
        settings=settings.to_dict(),
        notes=tuple(notes),
    )


def audit(
    predictions_path: str | Path,
    protected_value: str,
    positive_label: str | None = None,
    group_column: str = "group",
) -> tuple[PerformanceReport, FairnessReport]:
    """Performance and fairness of a saved predictions file."""
    preds = import_predictions(predictions_path, group_column=group_column, positive_label=positive_label)
    gc = group_confusion(preds, protected_value)
    return performance(gc.protected + gc.unprotected), fairness(gc)


def render_instance(report: SelectionReport) -> str:
    """DOT text of the combined feature model with the accepted instance highlighted."""
    if report.outcome.status != "ACCEPTED" or report.configuration is None:
        raise PipelineError("NOT_ACCEPTED", f"run outcome is {report.outcome}; nothing to render")
    return to_dot(combined_model(), highlight=Configuration(frozenset(report.configuration)), name="instance")
