"""Feature encoding shared by all learners: one-hot categoricals, optional
bag-of-words text, then standardization with training statistics."""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from ..dataset import Column, ColumnKind
from ..errors import LearnerError

TOKEN = re.compile(r"\w+")


def tokens(text: str) -> list[str]:
    return TOKEN.findall(text.lower())


@dataclass(frozen=True)
class FeatureEncoder:
    """Fitted encoding of raw feature rows into standardized float vectors.

    ``vocab`` holds the sorted categories (CATEGORICAL) or vocabulary (TEXT)
    of each input column; it is empty for NUMERIC columns.
    """

    columns: tuple[Column, ...]
    vocab: tuple[tuple[str, ...], ...]
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, columns, rows, allow_text: bool = False) -> "FeatureEncoder":
        columns = tuple(columns)
        vocab = []
        for j, col in enumerate(columns):
            if col.kind is ColumnKind.NUMERIC:
                vocab.append(())
            elif col.kind is ColumnKind.CATEGORICAL:
                vocab.append(tuple(sorted({str(r[j]) for r in rows})))
            elif allow_text:
                vocab.append(tuple(sorted({tok for r in rows for tok in tokens(str(r[j]))})))
            else:
                raise LearnerError("TEXT_FEATURES_UNSUPPORTED", f"column {col.name!r} holds text")
        raw = cls(columns, tuple(vocab), np.zeros(0), np.zeros(0))._raw(rows)
        mean = raw.mean(axis=0) if len(raw) else np.zeros(raw.shape[1])
        std = raw.std(axis=0) if len(raw) else np.ones(raw.shape[1])
        scale = np.where(std > 0, std, 1.0)
        return cls(columns, tuple(vocab), mean, scale)

    @property
    def width(self) -> int:
        return sum(len(v) if c.kind is not ColumnKind.NUMERIC else 1 for c, v in zip(self.columns, self.vocab))

    def _raw(self, rows) -> np.ndarray:
        out = np.zeros((len(rows), self.width), dtype=np.float64)
        for i, row in enumerate(rows):
            if len(row) != len(self.columns):
                raise LearnerError("ARITY_MISMATCH", f"row {i} has {len(row)} values, model expects {len(self.columns)}")
            k = 0
            for col, voc, value in zip(self.columns, self.vocab, row):
                if col.kind is ColumnKind.NUMERIC:
                    try:
                        out[i, k] = float(value)
                    except (TypeError, ValueError):
                        raise LearnerError("BAD_VALUE", f"row {i}: {col.name}={value!r} is not numeric") from None
                    k += 1
                elif col.kind is ColumnKind.CATEGORICAL:
                    text = str(value)
                    # unseen categories encode as all zeros
                    if text in voc:
                        out[i, k + voc.index(text)] = 1.0
                    k += len(voc)
                else:
                    lookup = {tok: p for p, tok in enumerate(voc)}
                    for tok in tokens(str(value)):
                        if tok in lookup:
                            out[i, k + lookup[tok]] += 1.0
                    k += len(voc)
        return out

    def transform(self, rows) -> np.ndarray:
        return np.ascontiguousarray((self._raw(rows) - self.mean) / self.scale)

    def to_dict(self) -> dict:
        return {
            "columns": [[c.name, c.kind.value] for c in self.columns],
            "vocab": [list(v) for v in self.vocab],
            "mean": self.mean.tolist(),
            "scale": self.scale.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureEncoder":
        return cls(
            tuple(Column(name, ColumnKind(kind)) for name, kind in d["columns"]),
            tuple(tuple(v) for v in d["vocab"]),
            np.asarray(d["mean"], dtype=np.float64),
            np.asarray(d["scale"], dtype=np.float64),
        )
