"""Confusion matrices, performance metrics and group fairness metrics.

Ratios are formed from exact integer/rational arithmetic and converted to
float once, so results do not depend on evaluation order. A metric whose
denominator is zero is ``None`` in the reports; the standalone fairness
functions raise ``MetricError("UNDEFINED_METRIC")`` instead.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from fractions import Fraction

from .errors import MetricError


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, int) or v < 0:
                raise ValueError(f"{f.name} must be a nonnegative integer, got {v!r}")

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class GroupedConfusion:
    protected: ConfusionMatrix
    unprotected: ConfusionMatrix

    @property
    def n_protected(self) -> int:
        return self.protected.n

    @property
    def n_unprotected(self) -> int:
        return self.unprotected.n

    def swapped(self) -> "GroupedConfusion":
        return GroupedConfusion(self.unprotected, self.protected)


def _ratio(num: int | Fraction, den: int | Fraction) -> float | None:
    if den == 0:
        return None
    return float(Fraction(num) / Fraction(den))


def confusion(predictions, positive_label: str | None = None) -> ConfusionMatrix:
    """Count outcomes of a ``PredictionSet`` against ``positive_label``."""
    entries = list(predictions.entries)
    if not entries:
        raise MetricError("EMPTY_PREDICTIONS", "no predictions to count")
    pos = positive_label if positive_label is not None else predictions.positive_label
    if pos not in predictions.labels:
        raise MetricError("UNKNOWN_POSITIVE_LABEL", f"{pos!r} is not one of {list(predictions.labels)}")
    tp = fp = fn = tn = 0
    for e in entries:
        actual, guessed = e.y_true == pos, e.y_pred == pos
        if actual and guessed:
            tp += 1
        elif guessed:
            fp += 1
        elif actual:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp, fp, fn, tn)


def group_confusion(predictions, protected_value: str, positive_label: str | None = None) -> GroupedConfusion:
    """Split by ``group == protected_value`` and count each side."""
    inside = [e for e in predictions.entries if e.group == protected_value]
    outside = [e for e in predictions.entries if e.group != protected_value]
    if not inside or not outside:
        side = "protected" if not inside else "unprotected"
        raise MetricError("EMPTY_GROUP", f"{side} group is empty (protected value {protected_value!r})")
    return GroupedConfusion(
        confusion(predictions.with_entries(inside), positive_label),
        confusion(predictions.with_entries(outside), positive_label),
    )


@dataclass(frozen=True)
class PerformanceReport:
    accuracy: float | None = None
    sensitivity: float | None = None
    specificity: float | None = None
    balanced_accuracy: float | None = None
    f1: float | None = None
    mcc: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PerformanceReport":
        return cls(**{f.name: d.get(f.name) for f in fields(cls)})

    def rounded(self, digits: int) -> "PerformanceReport":
        return PerformanceReport(**{k: round_sig(v, digits) for k, v in self.to_dict().items()})


PERFORMANCE_METRICS = tuple(f.name for f in fields(PerformanceReport))


def performance(cm: ConfusionMatrix) -> PerformanceReport:
    if cm.n == 0:
        raise MetricError("EMPTY_MATRIX", "confusion matrix has no entries")
    tp, fp, fn, tn = cm.tp, cm.fp, cm.fn, cm.tn
    sens = Fraction(tp, tp + fn) if tp + fn else None
    spec = Fraction(tn, tn + fp) if tn + fp else None
    bacc = float((sens + spec) / 2) if sens is not None and spec is not None else None
    den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    mcc = (tp * tn - fp * fn) / math.sqrt(den) if den else None
    if mcc is not None:
        mcc = max(-1.0, min(1.0, mcc))
    return PerformanceReport(
        accuracy=_ratio(tp + tn, cm.n),
        sensitivity=float(sens) if sens is not None else None,
        specificity=float(spec) if spec is not None else None,
        balanced_accuracy=bacc,
        f1=_ratio(2 * tp, 2 * tp + fp + fn),
        mcc=mcc,
    )


def eoo(gc: GroupedConfusion) -> float:
    """Equality of opportunity: protected TPR minus unprotected TPR (signed)."""
    p, u = gc.protected, gc.unprotected
    if p.tp + p.fn == 0 or u.tp + u.fn == 0:
        raise MetricError("UNDEFINED_METRIC", "EOO needs actual positives in both groups")
    return float(Fraction(p.tp, p.tp + p.fn) - Fraction(u.tp, u.tp + u.fn))


def di(gc: GroupedConfusion) -> float:
    """Disparate impact: protected over unprotected favorable-outcome rate."""
    p, u = gc.protected, gc.unprotected
    if p.n == 0 or u.n == 0 or u.tp + u.fp == 0:
        raise MetricError("UNDEFINED_METRIC", "DI needs nonempty groups and favorable outcomes in the unprotected group")
    return float(Fraction(p.tp + p.fp, p.n) / Fraction(u.tp + u.fp, u.n))


def abad(gc: GroupedConfusion) -> float:
    """Half the protected correct count minus the unprotected correct count.

    Count-based and signed, as the formula is stated; it is not a difference
    of balanced-accuracy rates despite the name.
    """
    p, u = gc.protected, gc.unprotected
    return float(Fraction(p.tp + p.tn, 2) - (u.tp + u.tn))


@dataclass(frozen=True)
class FairnessReport:
    eoo: float
    di: float | None
    abad: float

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "FairnessReport":
        return cls(d["eoo"], d.get("di"), d["abad"])

    def rounded(self, digits: int) -> "FairnessReport":
        return FairnessReport(round_sig(self.eoo, digits), round_sig(self.di, digits), round_sig(self.abad, digits))


FAIRNESS_METRICS = ("eoo", "di", "abad")


def fairness(gc: GroupedConfusion) -> FairnessReport:
    """EOO and ABAD are required; DI is ``None`` when its denominator vanishes."""
    try:
        ratio = di(gc)
    except MetricError:
        ratio = None
    return FairnessReport(eoo(gc), ratio, abad(gc))


def round_sig(value: float | None, digits: int = 10) -> float | None:
    """Round to ``digits`` significant digits (``None`` passes through)."""
    if value is None:
        return None
    return float(f"{value:.{digits}g}")
