"""Tabular datasets: CSV ingestion, selection profiles, stratified splitting."""

from __future__ import annotations

import csv
import enum
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DataError
from .rng import SplitMix64


class ColumnKind(str, enum.Enum):
    NUMERIC = "NUMERIC"
    CATEGORICAL = "CATEGORICAL"
    TEXT = "TEXT"


class PredictionKind(str, enum.Enum):
    CATEGORY = "CATEGORY"
    QUANTITY = "QUANTITY"
    JUST_LOOKING = "JUST_LOOKING"
    NONE = "NONE"


@dataclass(frozen=True)
class Column:
    name: str
    kind: ColumnKind


Value = float | str


@dataclass(frozen=True)
class TabularDataset:
    """Rows of parsed values (``float`` for NUMERIC columns, ``str`` otherwise).

    ``row_ids`` identify rows across splits; they default to ``0..n-1`` in
    file order.
    """

    columns: tuple[Column, ...]
    rows: tuple[tuple[Value, ...], ...]
    target: str | None = None
    sensitive: str | None = None
    row_ids: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))
        if not self.row_ids:
            object.__setattr__(self, "row_ids", tuple(range(len(self.rows))))
        if len(self.row_ids) != len(self.rows):
            raise ValueError("row_ids and rows differ in length")
        names = [c.name for c in self.columns]
        for i, row in enumerate(self.rows):
            if len(row) != len(names):
                raise DataError("RAGGED_ROW", f"row {i + 1} has {len(row)} values, expected {len(names)}", row=i + 1)
        for role in (self.target, self.sensitive):
            if role is not None and role not in names:
                raise DataError("MISSING_COLUMN", f"column {role!r} not found")

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise DataError("MISSING_COLUMN", f"column {name!r} not found") from None

    def column(self, name: str) -> list[Value]:
        i = self.index(name)
        return [r[i] for r in self.rows]

    def kind(self, name: str) -> ColumnKind:
        return self.columns[self.index(name)].kind

    @property
    def feature_columns(self) -> list[Column]:
        return [c for c in self.columns if c.name != self.target]

    def labels(self) -> list[str]:
        """Target values as label text (integral floats print without ``.0``)."""
        if self.target is None:
            raise DataError("UNLABELED", "dataset has no target column")
        return [label_text(v) for v in self.column(self.target)]

    def classes(self) -> list[str]:
        return sorted(set(self.labels()), key=_label_order)

    def groups(self) -> list[str]:
        if self.sensitive is None:
            raise DataError("MISSING_COLUMN", "dataset has no sensitive column")
        return [label_text(v) for v in self.column(self.sensitive)]

    def subset(self, positions: Iterable[int]) -> "TabularDataset":
        positions = list(positions)
        return replace(
            self,
            rows=tuple(self.rows[p] for p in positions),
            row_ids=tuple(self.row_ids[p] for p in positions),
        )

    def __len__(self) -> int:
        return len(self.rows)


def label_text(value: Value) -> str:
    if isinstance(value, float):
        if value.is_integer():
            return str(int(value))
        return repr(value)
    return value


def _label_order(label: str):
    # numeric labels sort numerically, then everything else lexically
    try:
        return (0, float(label), label)
    except ValueError:
        return (1, 0.0, label)


def sort_labels(labels: Iterable[str]) -> list[str]:
    return sorted(set(labels), key=_label_order)


def _parse_float(text: str) -> float | None:
    try:
        value = float(text)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def load_csv(
    path: str | Path,
    target: str | None = None,
    sensitive: str | None = None,
    text_columns: Sequence[str] = (),
) -> TabularDataset:
    """Read a UTF-8, comma-separated file with a header row.

    Column kinds: declared ``text_columns`` are TEXT, columns whose every cell
    parses as a finite number are NUMERIC, the rest CATEGORICAL. Empty cells
    count as missing and are rejected like short rows.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError("EMPTY_FILE", f"{path}: no header row")
        header = [h.strip() for h in header]
        raw = []
        for n, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(header) or any(cell.strip() == "" for cell in row):
                raise DataError(
                    "RAGGED_ROW",
                    f"{path}: data row {n} (line {reader.line_num}) has missing or extra cells",
                    row=n,
                )
            raw.append([cell.strip() for cell in row])
    if not raw:
        raise DataError("EMPTY_FILE", f"{path}: header only, no data rows")
    for role, name in (("target", target), ("sensitive", sensitive), *(("text", t) for t in text_columns)):
        if name is not None and name not in header:
            raise DataError("MISSING_COLUMN", f"{role} column {name!r} not in header")

    columns = []
    parsed_cols = []
    for j, name in enumerate(header):
        cells = [r[j] for r in raw]
        if name in text_columns:
            columns.append(Column(name, ColumnKind.TEXT))
            parsed_cols.append(cells)
            continue
        nums = [_parse_float(c) for c in cells]
        if all(v is not None for v in nums):
            columns.append(Column(name, ColumnKind.NUMERIC))
            parsed_cols.append(nums)
        else:
            columns.append(Column(name, ColumnKind.CATEGORICAL))
            parsed_cols.append(cells)
    rows = tuple(zip(*parsed_cols))
    return TabularDataset(tuple(columns), rows, target=target, sensitive=sensitive)


def heart_failure_path() -> Path:
    return Path(str(resources.files("varisel").joinpath("data", "heart_failure.csv")))


def load_heart_failure() -> TabularDataset:
    """The bundled 299-patient heart-failure records, target ``DEATH_EVENT``."""
    return load_csv(heart_failure_path(), target="DEATH_EVENT", sensitive="sex")


@dataclass(frozen=True)
class DatasetProfile:
    sample_size: int
    feature_count: int
    labeled: bool
    prediction_kind: PredictionKind
    text_data: bool
    few_features: bool
    positive_fraction: float | None = None
    known_category_count: int | None = None

    def to_dict(self) -> dict:
        return {
            "sample_size": self.sample_size,
            "feature_count": self.feature_count,
            "labeled": self.labeled,
            "prediction_kind": self.prediction_kind.value,
            "text_data": self.text_data,
            "few_features": self.few_features,
            "positive_fraction": self.positive_fraction,
            "known_category_count": self.known_category_count,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetProfile":
        return cls(
            sample_size=d["sample_size"],
            feature_count=d["feature_count"],
            labeled=d["labeled"],
            prediction_kind=PredictionKind(d["prediction_kind"]),
            text_data=d["text_data"],
            few_features=d["few_features"],
            positive_fraction=d.get("positive_fraction"),
            known_category_count=d.get("known_category_count"),
        )


# a numeric target with at most this many distinct integral values is treated as classes
MAX_INTEGRAL_CLASSES = 20


def target_is_categorical(dataset: TabularDataset) -> bool:
    if dataset.target is None:
        return False
    if dataset.kind(dataset.target) is not ColumnKind.NUMERIC:
        return True
    values = set(dataset.column(dataset.target))
    return len(values) <= MAX_INTEGRAL_CLASSES and all(float(v).is_integer() for v in values)


def default_positive_label(classes: Sequence[str]) -> str:
    """The second of two sorted labels (``"1"`` for 0/1 targets, ``"yes"`` for no/yes)."""
    return sort_labels(classes)[-1]


def profile(
    dataset: TabularDataset,
    hint: PredictionKind | str | None = None,
    thresholds=None,
    positive_label: str | None = None,
    known_category_count: int | None = None,
) -> DatasetProfile:
    from .selector import SelectorThresholds

    thresholds = thresholds or SelectorThresholds()
    labeled = dataset.target is not None
    if hint is None:
        if labeled:
            kind = PredictionKind.CATEGORY if target_is_categorical(dataset) else PredictionKind.QUANTITY
        else:
            kind = PredictionKind.NONE
    else:
        kind = PredictionKind(hint)

    feature_count = len(dataset.columns) - (1 if labeled else 0)
    positive_fraction = None
    if labeled and kind is PredictionKind.CATEGORY:
        counts = Counter(dataset.labels())
        if len(counts) > 2:
            if positive_label is not None:
                raise DataError("NON_BINARY_TARGET", f"target has {len(counts)} classes; positive fraction needs 2")
        elif counts:
            pos = positive_label if positive_label is not None else default_positive_label(list(counts))
            positive_fraction = counts.get(pos, 0) / len(dataset)
    elif positive_label is not None:
        raise DataError("NON_BINARY_TARGET", "positive fraction needs a labeled categorical target")

    return DatasetProfile(
        sample_size=len(dataset),
        feature_count=feature_count,
        labeled=labeled,
        prediction_kind=kind,
        text_data=any(c.kind is ColumnKind.TEXT for c in dataset.feature_columns),
        few_features=feature_count < thresholds.few_features,
        positive_fraction=positive_fraction,
        known_category_count=known_category_count,
    )


def stratum_test_sizes(class_counts: dict[str, int], test_fraction: float) -> dict[str, int]:
    """Per-class test sizes by largest-remainder rounding.

    The total is ``round_half_up(N * test_fraction)``; each class gets the
    floor of its quota and the leftover units go to the largest remainders
    (ties to the earlier class in label order).
    """
    frac = Fraction(test_fraction).limit_denominator(10**9)
    quotas = {c: n * frac for c, n in class_counts.items()}
    total = math.floor(sum(class_counts.values()) * frac + Fraction(1, 2))
    counts = {c: math.floor(q) for c, q in quotas.items()}
    order = sorted(quotas, key=lambda c: (-(quotas[c] - counts[c]), _label_order(c)))
    for c in order[: total - sum(counts.values())]:
        counts[c] += 1
    return counts


def stratified_split(
    dataset: TabularDataset,
    test_fraction: float,
    seed: int,
    classes: Sequence[str] | None = None,
) -> tuple[TabularDataset, TabularDataset]:
    """Deterministic stratified train/test partition.

    Each class's rows are shuffled with one SplitMix64 stream seeded by
    ``seed`` (classes visited in label order); the first ``stratum_test_sizes`` of
    them go to the test side. Both sides keep file order.
    """
    if dataset.target is None:
        raise DataError("UNLABELED", "stratified split needs a target column")
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must lie in (0, 1)")
    labels = dataset.labels()
    by_class: dict[str, list[int]] = {}
    for pos, lab in enumerate(labels):
        by_class.setdefault(lab, []).append(pos)
    for c in classes or ():
        if c not in by_class:
            raise DataError("DEGENERATE_CLASS", f"class {c!r} has no rows")

    counts = stratum_test_sizes({c: len(v) for c, v in by_class.items()}, test_fraction)
    rng = SplitMix64(seed)
    test_pos: set[int] = set()
    for c in sorted(by_class, key=_label_order):
        members = list(by_class[c])
        rng.shuffle(members)
        test_pos.update(members[: counts[c]])
    train = [p for p in range(len(dataset)) if p not in test_pos]
    test = sorted(test_pos)
    return dataset.subset(train), dataset.subset(test)
