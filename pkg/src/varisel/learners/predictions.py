"""Prediction sets and the ``row_id,y_true,y_pred,group`` file format."""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

from ..dataset import sort_labels
from ..errors import LearnerError

HEADER = ("row_id", "y_true", "y_pred", "group")


@dataclass(frozen=True)
class PredictionEntry:
    row_id: int
    y_true: str
    y_pred: str
    group: str = ""


@dataclass(frozen=True)
class PredictionSet:
    """Predictions over a declared binary label set.

    ``labels`` is sorted; the positive label defaults to the last one.
    """

    entries: tuple[PredictionEntry, ...]
    labels: tuple[str, ...]
    positive_label: str

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        object.__setattr__(self, "labels", tuple(self.labels))
        ids = [e.row_id for e in self.entries]
        if len(set(ids)) != len(ids):
            dup = next(i for i in ids if ids.count(i) > 1)
            raise LearnerError("DUPLICATE_ROW_ID", f"row_id {dup} appears more than once")
        if len(self.labels) > 2:
            raise LearnerError("NON_BINARY_LABELS", f"more than two labels: {list(self.labels)}")
        seen = {e.y_true for e in self.entries} | {e.y_pred for e in self.entries}
        if not seen <= set(self.labels):
            raise LearnerError("NON_BINARY_LABELS", f"labels {sorted(seen - set(self.labels))} not declared")
        if self.positive_label not in self.labels:
            raise LearnerError("UNKNOWN_POSITIVE_LABEL", f"{self.positive_label!r} not in {list(self.labels)}")

    @classmethod
    def build(
        cls,
        entries: Iterable[PredictionEntry],
        positive_label: str | None = None,
        labels: Sequence[str] | None = None,
    ) -> "PredictionSet":
        entries = tuple(entries)
        found = {e.y_true for e in entries} | {e.y_pred for e in entries}
        if labels is None:
            declared = set(found) | ({positive_label} if positive_label is not None else set())
            if len(declared) > 2:
                raise LearnerError("NON_BINARY_LABELS", f"found {len(declared)} distinct labels: {sort_labels(declared)}")
            labels = sort_labels(declared)
        labels = tuple(labels)
        if positive_label is None:
            if not labels:
                raise LearnerError("EMPTY_PREDICTIONS", "no labels to choose a positive one from")
            positive_label = labels[-1]
        return cls(entries, labels, positive_label)

    def with_entries(self, entries: Iterable[PredictionEntry]) -> "PredictionSet":
        return replace(self, entries=tuple(entries))

    def __len__(self) -> int:
        return len(self.entries)


def import_predictions(
    path: str | Path,
    group_column: str = "group",
    positive_label: str | None = None,
) -> PredictionSet:
    """Read a predictions CSV with header ``row_id,y_true,y_pred,group``.

    ``group_column`` names the column holding the group value when it is not
    called ``group``.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        required = ("row_id", "y_true", "y_pred", group_column)
        missing = [c for c in required if c not in header]
        if missing:
            raise LearnerError("MISSING_COLUMN", f"{path}: missing column(s) {', '.join(missing)}")
        pos = {c: header.index(c) for c in required}
        entries = []
        seen: set[int] = set()
        for n, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(header):
                raise LearnerError("RAGGED_ROW", f"{path}: data row {n} has {len(row)} cells, expected {len(header)}")
            try:
                rid = int(row[pos["row_id"]])
            except ValueError:
                raise LearnerError("BAD_ROW_ID", f"{path}: data row {n} has a non-integer row_id") from None
            if rid in seen:
                raise LearnerError("DUPLICATE_ROW_ID", f"{path}: row_id {rid} repeats (data row {n})")
            seen.add(rid)
            entries.append(
                PredictionEntry(
                    rid,
                    row[pos["y_true"]].strip(),
                    row[pos["y_pred"]].strip(),
                    row[pos[group_column]].strip(),
                )
            )
    return PredictionSet.build(entries, positive_label)


def write_predictions(path: str | Path, predictions: PredictionSet) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HEADER)
        for e in predictions.entries:
            writer.writerow((e.row_id, e.y_true, e.y_pred, e.group))
