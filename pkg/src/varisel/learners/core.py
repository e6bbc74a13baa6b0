"""Desk-scale binary classifiers for the classification branch of the selector.

Every learner is deterministic given ``(spec, train_set)``: randomness comes
only from a SplitMix64 stream seeded by ``spec.seed``, and the hot loops run
in ``varisel.kernels`` (compiled or pure Python, bit-identical).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .. import kernels
from ..dataset import TabularDataset, sort_labels
from ..errors import LearnerError
from ..rng import SplitMix64
from ..selector import AlgorithmKind
from .encoding import FeatureEncoder

A = AlgorithmKind

DEFAULTS: dict[AlgorithmKind, dict[str, float]] = {
    A.LINEAR_SVC: {"lam": 0.01, "epochs": 200, "balanced": 1},
    A.KNN: {"k": 5},
    A.RBF_SVC: {"lam": 0.01, "epochs": 20, "gamma": 0, "balanced": 1},
    A.ENSEMBLE: {"n_trees": 100, "max_depth": 8, "max_features": 0, "bootstrap": 1, "min_samples_split": 2},
    A.SGD_CLASSIFIER: {"lam": 1e-4, "epochs": 50, "eta0": 0.1, "balanced": 1},
    A.NAIVE_BAYES: {"var_smoothing": 1e-9},
}
TRAINABLE = frozenset(DEFAULTS)
# margin-based learners cannot be fitted on a single class
NEEDS_TWO_CLASSES = frozenset({A.LINEAR_SVC, A.RBF_SVC, A.SGD_CLASSIFIER})
MODEL_FORMAT = "varisel-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class LearnerSpec:
    kind: AlgorithmKind
    hyperparameters: Mapping[str, float] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        try:
            kind = AlgorithmKind(self.kind)
        except ValueError:
            raise LearnerError("UNSUPPORTED_KIND", f"unknown algorithm {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)
        if kind not in TRAINABLE:
            raise LearnerError("UNSUPPORTED_KIND", f"{kind.value} is not a trainable classifier")
        unknown = set(self.hyperparameters) - set(DEFAULTS[kind])
        if unknown:
            raise LearnerError("UNKNOWN_HYPERPARAMETER", f"{kind.value} has no hyperparameter(s) {sorted(unknown)}")

    @property
    def params(self) -> dict[str, float]:
        return {**DEFAULTS[self.kind], **self.hyperparameters}


@dataclass(frozen=True, eq=False)
class TrainedModel:
    kind: AlgorithmKind
    labels: tuple[str, ...]
    encoder: FeatureEncoder
    parameters: dict[str, Any]

    @property
    def standardization(self) -> tuple[np.ndarray, np.ndarray]:
        return self.encoder.mean, self.encoder.scale


def _class_weights(y01: np.ndarray, balanced: bool) -> np.ndarray:
    if not balanced:
        return np.ones(len(y01))
    n = len(y01)
    counts = np.bincount(y01, minlength=2).astype(np.float64)
    return np.array([n / (2.0 * counts[c]) for c in y01.tolist()], dtype=np.float64)


def _visit_order(rng: SplitMix64, n: int, epochs: int) -> np.ndarray:
    order: list[int] = []
    base = list(range(n))
    for _ in range(epochs):
        perm = list(base)
        rng.shuffle(perm)
        order.extend(perm)
    return np.asarray(order, dtype=np.int64)


def _features(train_set: TabularDataset) -> tuple[list, list]:
    cols = train_set.feature_columns
    idx = [train_set.index(c.name) for c in cols]
    return cols, [tuple(r[i] for i in idx) for r in train_set.rows]


def train(spec: LearnerSpec, train_set: TabularDataset, labels: Sequence[str] | None = None) -> TrainedModel:
    """Fit ``spec.kind`` on a labeled binary dataset.

    ``labels`` declares the binary label set and its order (index 0 then 1);
    it defaults to the sorted labels present. The second label is the
    positive (+1) side for the margin learners.
    """
    if train_set.target is None:
        raise LearnerError("UNLABELED", "training needs a target column")
    present = sort_labels(train_set.labels())
    declared = tuple(labels) if labels is not None else tuple(present)
    if len(declared) > 2 or len(set(declared)) != len(declared):
        raise LearnerError("NON_BINARY_LABELS", f"binary classification only, got labels {list(declared)}")
    missing = set(present) - set(declared)
    if missing:
        raise LearnerError("NON_BINARY_LABELS", f"labels {sorted(missing)} are not declared")
    if len(present) < 2 and spec.kind in NEEDS_TWO_CLASSES:
        raise LearnerError("SINGLE_CLASS_TRAINING_SET", f"{spec.kind.value} needs both classes in the training set")
    if len(train_set) == 0:
        raise LearnerError("EMPTY_TRAINING_SET", "no training rows")

    cols, rows = _features(train_set)
    encoder = FeatureEncoder.fit(cols, rows, allow_text=spec.kind is A.NAIVE_BAYES)
    X = encoder.transform(rows)
    y01 = np.asarray([declared.index(lab) for lab in train_set.labels()], dtype=np.int64)
    p = spec.params
    rng = SplitMix64(spec.seed)
    n, d = X.shape

    if spec.kind is A.LINEAR_SVC:
        ypm = np.where(y01 == 1, 1.0, -1.0)
        w, b = kernels.hinge_fit(X, ypm, _class_weights(y01, p["balanced"]), float(p["lam"]), int(p["epochs"]))
        params = {"w": np.asarray(w), "b": float(b)}
    elif spec.kind is A.SGD_CLASSIFIER:
        ypm = np.where(y01 == 1, 1.0, -1.0)
        order = _visit_order(rng, n, int(p["epochs"]))
        w, b = kernels.logistic_sgd_fit(
            X, ypm, _class_weights(y01, p["balanced"]), order, float(p["lam"]), float(p["eta0"])
        )
        params = {"w": np.asarray(w), "b": float(b)}
    elif spec.kind is A.RBF_SVC:
        ypm = np.where(y01 == 1, 1.0, -1.0)
        gamma = float(p["gamma"]) or 1.0 / max(d, 1)
        # +1 acts as an implicit bias feature
        K = np.ascontiguousarray(kernels.rbf_kernel(X, X, gamma) + 1.0)
        steps = int(p["epochs"]) * n
        order = np.asarray([rng.below(n) for _ in range(steps)], dtype=np.int64)
        alpha = kernels.pegasos_kernel_fit(K, ypm, _class_weights(y01, p["balanced"]), order, float(p["lam"]))
        keep = np.flatnonzero(alpha)
        params = {
            "support": np.ascontiguousarray(X[keep]),
            "coef": alpha[keep] * ypm[keep] / (float(p["lam"]) * steps),
            "gamma": gamma,
        }
    elif spec.kind is A.KNN:
        k = int(p["k"])
        if k < 1:
            raise LearnerError("BAD_HYPERPARAMETER", "k must be at least 1")
        params = {"X": X, "y": y01, "k": k}
    elif spec.kind is A.ENSEMBLE:
        params = _fit_forest(X, y01, p, rng)
    else:
        params = _fit_gaussian_nb(X, y01, len(declared), float(p["var_smoothing"]))
    return TrainedModel(spec.kind, declared, encoder, params)


def _fit_tree(X, y01, rows: np.ndarray, max_depth: int, max_features: int, min_split: int, rng: SplitMix64) -> dict:
    d = X.shape[1]
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[int] = []

    def majority(rs) -> int:
        ones = int(y01[rs].sum())
        return 1 if ones > len(rs) - ones else 0

    def grow(rs: np.ndarray, depth: int) -> int:
        node = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(majority(rs))
        ones = int(y01[rs].sum())
        if depth >= max_depth or len(rs) < min_split or ones in (0, len(rs)):
            return node
        if max_features >= d:
            cand = np.arange(d, dtype=np.int64)
        else:
            pool = list(range(d))
            rng.shuffle(pool)
            cand = np.asarray(sorted(pool[:max_features]), dtype=np.int64)
        f, thr, _ = kernels.best_split(X, y01, np.ascontiguousarray(rs, dtype=np.int64), cand)
        if f < 0:
            return node
        go_left = X[rs, f] <= thr
        feature[node] = int(f)
        threshold[node] = float(thr)
        left[node] = grow(rs[go_left], depth + 1)
        right[node] = grow(rs[~go_left], depth + 1)
        return node

    grow(rows, 0)
    return {
        "feature": np.asarray(feature, dtype=np.int64),
        "threshold": np.asarray(threshold, dtype=np.float64),
        "left": np.asarray(left, dtype=np.int64),
        "right": np.asarray(right, dtype=np.int64),
        "value": np.asarray(value, dtype=np.int64),
    }


def _fit_forest(X, y01, p, rng: SplitMix64) -> dict:
    n, d = X.shape
    n_trees, max_depth = int(p["n_trees"]), int(p["max_depth"])
    max_features = int(p["max_features"]) or max(1, int(round(math.sqrt(d))))
    max_features = min(max_features, d) if max_features > 0 else d
    trees = []
    for _ in range(n_trees):
        tree_rng = rng.spawn()
        if p["bootstrap"]:
            rows = np.asarray([tree_rng.below(n) for _ in range(n)], dtype=np.int64)
        else:
            rows = np.arange(n, dtype=np.int64)
        trees.append(_fit_tree(X, y01, rows, max_depth, max_features, int(p["min_samples_split"]), tree_rng))
    return {"trees": trees}


def _fit_gaussian_nb(X, y01, n_labels: int, smoothing: float) -> dict:
    eps = smoothing * float(X.var(axis=0).max()) if X.size else smoothing
    means, variances, priors = [], [], []
    for c in range(n_labels):
        Xc = X[y01 == c]
        if len(Xc):
            means.append(Xc.mean(axis=0))
            variances.append(Xc.var(axis=0) + eps)
            priors.append(len(Xc) / len(X))
        else:
            means.append(np.zeros(X.shape[1]))
            variances.append(np.ones(X.shape[1]))
            priors.append(0.0)
    return {"mean": np.asarray(means), "var": np.asarray(variances), "prior": np.asarray(priors)}


def _tree_predict(tree: dict, X: np.ndarray) -> np.ndarray:
    node = np.zeros(len(X), dtype=np.int64)
    feature, threshold = tree["feature"], tree["threshold"]
    left, right = tree["left"], tree["right"]
    rows = np.arange(len(X))
    while True:
        f = feature[node]
        inner = f >= 0
        if not inner.any():
            return tree["value"][node]
        idx = rows[inner]
        go_left = X[idx, f[inner]] <= threshold[node[inner]]
        node[idx] = np.where(go_left, left[node[idx]], right[node[idx]])


def _rows_of(model: TrainedModel, rows) -> list:
    if isinstance(rows, TabularDataset):
        names = [c.name for c in model.encoder.columns]
        idx = [rows.index(n) for n in names]
        return [tuple(r[i] for i in idx) for r in rows.rows]
    return [tuple(r) for r in rows]


def predict(model: TrainedModel, rows) -> list[str]:
    """Labels for raw feature rows (or the feature columns of a dataset)."""
    raw = _rows_of(model, rows)
    for i, r in enumerate(raw):
        if len(r) != len(model.encoder.columns):
            raise LearnerError("ARITY_MISMATCH", f"row {i} has {len(r)} values, model expects {len(model.encoder.columns)}")
    if not raw:
        return []
    X = model.encoder.transform(raw)
    p = model.parameters
    kind = model.kind
    if kind in (A.LINEAR_SVC, A.SGD_CLASSIFIER):
        idx = ((X @ p["w"] + p["b"]) > 0).astype(np.int64)
    elif kind is A.RBF_SVC:
        if len(p["coef"]):
            K = kernels.rbf_kernel(X, p["support"], p["gamma"]) + 1.0
            idx = ((K @ p["coef"]) > 0).astype(np.int64)
        else:
            idx = np.zeros(len(X), dtype=np.int64)
    elif kind is A.KNN:
        idx = kernels.knn_predict(p["X"], p["y"], X, p["k"], len(model.labels))
    elif kind is A.ENSEMBLE:
        votes = sum(_tree_predict(t, X) for t in p["trees"])
        # ties go to label index 0
        idx = (2 * np.asarray(votes) > len(p["trees"])).astype(np.int64)
    else:
        loglik = []
        for c in range(len(p["prior"])):
            if p["prior"][c] == 0:
                loglik.append(np.full(len(X), -np.inf))
                continue
            var = p["var"][c]
            ll = -0.5 * np.sum(np.log(2 * np.pi * var) + (X - p["mean"][c]) ** 2 / var, axis=1)
            loglik.append(ll + np.log(p["prior"][c]))
        idx = np.argmax(np.vstack(loglik), axis=0)
    if len(model.labels) == 1:
        return [model.labels[0]] * len(X)
    return [model.labels[int(i)] for i in idx]


# --- serialization -------------------------------------------------------


def _encode(value):
    if isinstance(value, np.ndarray):
        return {"__array__": value.tolist(), "dtype": str(value.dtype)}
    if isinstance(value, dict):
        return {k: _encode(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_encode(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    return value


def _decode(value):
    if isinstance(value, dict):
        if "__array__" in value:
            return np.asarray(value["__array__"], dtype=value["dtype"]).reshape(np.shape(value["__array__"]))
        return {k: _decode(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_decode(v) for v in value]
    return value


def dump_model(model: TrainedModel) -> str:
    """JSON text form; floats round-trip exactly. Stable only within a format version."""
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "kind": model.kind.value,
        "labels": list(model.labels),
        "encoder": model.encoder.to_dict(),
        "parameters": _encode(model.parameters),
    }
    return json.dumps(doc, sort_keys=True)


def load_model(text: str) -> TrainedModel:
    doc = json.loads(text)
    if doc.get("format") != MODEL_FORMAT or doc.get("version") != MODEL_VERSION:
        raise LearnerError("BAD_MODEL_FILE", f"expected {MODEL_FORMAT} v{MODEL_VERSION}")
    params = _decode(doc["parameters"])
    if "support" in params:
        params["support"] = np.ascontiguousarray(params["support"].reshape(-1, len(doc["encoder"]["mean"])))
    return TrainedModel(
        AlgorithmKind(doc["kind"]),
        tuple(doc["labels"]),
        FeatureEncoder.from_dict(doc["encoder"]),
        params,
    )
