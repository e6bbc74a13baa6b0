"""Algorithm recommendation from a dataset profile.

The scikit-learn cheat-sheet is encoded as ``RULES``: an ordered table of
branches. The first branch whose conditions all hold produces the queue; each
step inside it may add its own conditions. Edges labelled "not working" in the
flowchart become queue order, so the pipeline tries the next item when the
previous one misses the quality criterion.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

from .dataset import DatasetProfile, PredictionKind
from .errors import SelectorError
from .fm import Configuration, Constraint, Feature, FeatureModel, Group, Variability, load_bundled, parse_formula
from .fm.model import validate_configuration


@dataclass(frozen=True)
class SelectorThresholds:
    min_samples: int = 50
    large_dataset: int = 100_000
    clustering_large: int = 10_000
    few_features: int = 30

    def __post_init__(self):
        for name in ("min_samples", "large_dataset", "clustering_large", "few_features"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if not self.min_samples < self.clustering_large < self.large_dataset:
            raise ValueError("thresholds must satisfy min_samples < clustering_large < large_dataset")

    def to_dict(self) -> dict:
        return {
            "min_samples": self.min_samples,
            "large_dataset": self.large_dataset,
            "clustering_large": self.clustering_large,
            "few_features": self.few_features,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SelectorThresholds":
        unknown = set(d) - set(cls().to_dict())
        if unknown:
            raise ValueError(f"unknown threshold(s): {', '.join(sorted(unknown))}")
        return cls(**d)


class AlgorithmKind(str, enum.Enum):
    LINEAR_SVC = "LINEAR_SVC"
    NAIVE_BAYES = "NAIVE_BAYES"
    KNN = "KNN"
    RBF_SVC = "RBF_SVC"
    ENSEMBLE = "ENSEMBLE"
    SGD_CLASSIFIER = "SGD_CLASSIFIER"
    KERNEL_APPROXIMATION = "KERNEL_APPROXIMATION"
    KMEANS = "KMEANS"
    MINIBATCH_KMEANS = "MINIBATCH_KMEANS"
    MEANSHIFT = "MEANSHIFT"
    VBGMM = "VBGMM"
    LASSO = "LASSO"
    ELASTICNET = "ELASTICNET"
    RIDGE = "RIDGE"
    SVR_LINEAR = "SVR_LINEAR"
    SVR_RBF = "SVR_RBF"
    SGD_REGRESSOR = "SGD_REGRESSOR"
    ENSEMBLE_REGRESSOR = "ENSEMBLE_REGRESSOR"
    RANDOMIZED_PCA = "RANDOMIZED_PCA"
    ISOMAP = "ISOMAP"
    SPECTRAL_EMBEDDING = "SPECTRAL_EMBEDDING"
    LLE = "LLE"
    GET_MORE_DATA = "GET_MORE_DATA"
    TOUGH_LUCK = "TOUGH_LUCK"

    @property
    def terminal(self) -> bool:
        return self in TERMINAL


TERMINAL = frozenset({AlgorithmKind.GET_MORE_DATA, AlgorithmKind.TOUGH_LUCK})


@dataclass(frozen=True)
class MethodQueue:
    """FIFO of candidates; ``rationale[i]`` explains ``items[i]``."""

    items: tuple[AlgorithmKind, ...]
    rationale: tuple[str, ...]

    def __post_init__(self):
        if len(self.items) != len(self.rationale):
            raise ValueError("one rationale line per item")
        if not self.items or not self.items[-1].terminal:
            raise ValueError("queue must end with a terminal placeholder")
        if len(set(self.items)) != len(self.items):
            raise ValueError("queue items must be unique")

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)

    def trainable(self) -> list[AlgorithmKind]:
        return [a for a in self.items if not a.terminal]

    def to_dict(self) -> dict:
        return {"items": [a.value for a in self.items], "rationale": list(self.rationale)}

    @classmethod
    def from_dict(cls, d: dict) -> "MethodQueue":
        return cls(tuple(AlgorithmKind(a) for a in d["items"]), tuple(d["rationale"]))


# --- rule table -----------------------------------------------------------


@dataclass(frozen=True)
class Condition:
    holds: Callable[[DatasetProfile, SelectorThresholds], bool]
    describe: Callable[[DatasetProfile, SelectorThresholds], str]


def _size_at_least(attr: str, label: str) -> Condition:
    return Condition(
        lambda p, t: p.sample_size >= getattr(t, attr),
        lambda p, t: f"sample_size {p.sample_size} ≥ {getattr(t, attr)} ({label})",
    )


def _size_below(attr: str, label: str) -> Condition:
    return Condition(
        lambda p, t: p.sample_size < getattr(t, attr),
        lambda p, t: f"sample_size {p.sample_size} < {getattr(t, attr)} ({label})",
    )


def _predicting(kind: PredictionKind) -> Condition:
    return Condition(lambda p, t: p.prediction_kind is kind, lambda p, t: f"prediction={kind.value}")


def _flag(attr: str, value: bool, yes: str, no: str) -> Condition:
    return Condition(lambda p, t: bool(getattr(p, attr)) is value, lambda p, t: yes if value else no)


ENOUGH = _size_at_least("min_samples", "min_samples")
TOO_FEW = _size_below("min_samples", "min_samples")
UNDER_LARGE = _size_below("large_dataset", "large_dataset")
OVER_LARGE = _size_at_least("large_dataset", "large_dataset")
UNDER_CLUSTER = _size_below("clustering_large", "clustering_large")
OVER_CLUSTER = _size_at_least("clustering_large", "clustering_large")
LABELED = _flag("labeled", True, "labeled", "unlabeled")
UNLABELED = _flag("labeled", False, "labeled", "unlabeled")
TEXT = _flag("text_data", True, "text_data", "no text_data")
NO_TEXT = _flag("text_data", False, "text_data", "no text_data")
FEW = Condition(
    lambda p, t: p.few_features,
    lambda p, t: f"feature_count {p.feature_count} < {t.few_features} (few features)",
)
MANY = Condition(
    lambda p, t: not p.few_features,
    lambda p, t: f"feature_count {p.feature_count} ≥ {t.few_features} (many features)",
)
KNOWN_K = Condition(
    lambda p, t: p.known_category_count is not None,
    lambda p, t: f"number of categories known ({p.known_category_count})",
)
UNKNOWN_K = Condition(lambda p, t: p.known_category_count is None, lambda p, t: "number of categories unknown")


@dataclass(frozen=True)
class Step:
    algorithm: AlgorithmKind
    conditions: tuple[Condition, ...] = ()


@dataclass(frozen=True)
class Branch:
    name: str
    conditions: tuple[Condition, ...]
    steps: tuple[Step, ...]


A = AlgorithmKind
CATEGORY = _predicting(PredictionKind.CATEGORY)
QUANTITY = _predicting(PredictionKind.QUANTITY)
LOOKING = _predicting(PredictionKind.JUST_LOOKING)

RULES: tuple[Branch, ...] = (
    Branch("get more data", (TOO_FEW,), (Step(A.GET_MORE_DATA),)),
    Branch(
        "classification",
        (ENOUGH, CATEGORY, LABELED, UNDER_LARGE),
        (
            Step(A.LINEAR_SVC),
            Step(A.NAIVE_BAYES, (TEXT,)),
            Step(A.KNN, (NO_TEXT,)),
            Step(A.RBF_SVC, (NO_TEXT,)),
            Step(A.ENSEMBLE, (NO_TEXT,)),
        ),
    ),
    Branch(
        "large classification",
        (ENOUGH, CATEGORY, LABELED, OVER_LARGE),
        (Step(A.SGD_CLASSIFIER), Step(A.KERNEL_APPROXIMATION)),
    ),
    Branch(
        "clustering, known categories",
        (ENOUGH, CATEGORY, UNLABELED, KNOWN_K),
        (
            Step(A.KMEANS, (UNDER_CLUSTER,)),
            Step(A.MINIBATCH_KMEANS, (OVER_CLUSTER,)),
            Step(A.SPECTRAL_EMBEDDING, (UNDER_CLUSTER,)),
        ),
    ),
    Branch(
        "clustering, unknown categories",
        (ENOUGH, CATEGORY, UNLABELED, UNKNOWN_K, UNDER_CLUSTER),
        (Step(A.MEANSHIFT), Step(A.VBGMM)),
    ),
    Branch(
        "regression",
        (ENOUGH, QUANTITY, LABELED, UNDER_LARGE),
        (
            Step(A.LASSO, (FEW,)),
            Step(A.ELASTICNET, (FEW,)),
            Step(A.RIDGE, (MANY,)),
            Step(A.SVR_LINEAR, (MANY,)),
            Step(A.SVR_RBF),
            Step(A.ENSEMBLE_REGRESSOR),
        ),
    ),
    Branch("large regression", (ENOUGH, QUANTITY, LABELED, OVER_LARGE), (Step(A.SGD_REGRESSOR),)),
    Branch(
        "dimensionality reduction",
        (ENOUGH, LOOKING),
        (
            Step(A.RANDOMIZED_PCA),
            Step(A.ISOMAP, (UNDER_CLUSTER,)),
            Step(A.SPECTRAL_EMBEDDING, (UNDER_CLUSTER,)),
            Step(A.LLE, (UNDER_CLUSTER,)),
            Step(A.KERNEL_APPROXIMATION, (OVER_CLUSTER,)),
        ),
    ),
)


def recommend(profile: DatasetProfile, thresholds: SelectorThresholds | None = None) -> MethodQueue:
    """Map a profile to a FIFO queue ending in a terminal placeholder."""
    t = thresholds or SelectorThresholds()
    for branch in RULES:
        if not all(c.holds(profile, t) for c in branch.conditions):
            continue
        shared = [c.describe(profile, t) for c in branch.conditions]
        items: list[AlgorithmKind] = []
        lines: list[str] = []
        for step in branch.steps:
            if not all(c.holds(profile, t) for c in step.conditions):
                continue
            parts = list(shared)
            if items:
                parts.append(f"{items[-1].value} not working")
            parts.extend(c.describe(profile, t) for c in step.conditions)
            items.append(step.algorithm)
            lines.append("; ".join(parts) + f" → {step.algorithm.value}")
        if items[-1].terminal:
            return MethodQueue(tuple(items), tuple(lines))
        reason = f"{items[-1].value} not working; no further recommendation"
        return MethodQueue(tuple(items) + (A.TOUGH_LUCK,), tuple(lines) + (f"{reason} → TOUGH_LUCK",))
    return MethodQueue((A.TOUGH_LUCK,), (f"no heuristic branch matches prediction={profile.prediction_kind.value} → TOUGH_LUCK",))


def explain(queue: MethodQueue) -> list[str]:
    """One rule-trace line per queue item."""
    return list(queue.rationale)


# --- feature-model instances ------------------------------------------------

ROOT = "MLModelSelection"
TECHNIQUE_LEAVES = {
    "Classification": {
        A.LINEAR_SVC: "LinearSVC",
        A.NAIVE_BAYES: "NaiveBayes",
        A.KNN: "KNeighborsClassifier",
        A.RBF_SVC: "SVC",
        A.ENSEMBLE: "EnsembleClassifiers",
        A.SGD_CLASSIFIER: "SGDClassifier",
        A.KERNEL_APPROXIMATION: "ClsKernelApproximation",
    },
    "Clustering": {
        A.KMEANS: "KMeans",
        A.MINIBATCH_KMEANS: "MiniBatchKMeans",
        A.SPECTRAL_EMBEDDING: "SpectralClustering",
        A.MEANSHIFT: "MeanShift",
        A.VBGMM: "VBGMM",
    },
    "Regression": {
        A.LASSO: "Lasso",
        A.ELASTICNET: "ElasticNet",
        A.RIDGE: "RidgeRegression",
        A.SVR_LINEAR: "SVRLinear",
        A.SVR_RBF: "SVRRBF",
        A.ENSEMBLE_REGRESSOR: "EnsembleRegressors",
        A.SGD_REGRESSOR: "SGDRegressor",
    },
    "DimensionalityReduction": {
        A.RANDOMIZED_PCA: "RandomizedPCA",
        A.ISOMAP: "Isomap",
        A.SPECTRAL_EMBEDDING: "SpectralEmbedding",
        A.LLE: "LLE",
        A.KERNEL_APPROXIMATION: "DRKernelApproximation",
    },
}

METRIC_FEATURES = {
    "f1": "F1",
    "accuracy": "Accuracy",
    "balanced_accuracy": "BalancedAccuracy",
    "sensitivity": "Sensitivity",
    "specificity": "Specificity",
    "mcc": "MCC",
    "eo": "EO",
    "eoo": "EOO",
    "di": "DI",
    "knnc": "KNNC",
    "abad": "ABAD",
    "aaod": "AAOD",
}

# Cross-tree constraints tying the technique tree to the assumption tree.
# They mirror RULES with the default thresholds' sample-size bands.
LINKING_CONSTRAINTS = (
    "Classification => PredictCategory & Labeled",
    "Clustering => PredictCategory & Unlabeled",
    "Regression => PredictQuantity",
    "DimensionalityReduction => JustLooking",
    "MLTechniques => !BelowMinimumSamples",
    "LinearSVC | KNeighborsClassifier | SVC | EnsembleClassifiers | NaiveBayes => !LargeSamples",
    "SGDClassifier | ClsKernelApproximation => LargeSamples",
    "NaiveBayes => TextData",
    "KNeighborsClassifier | SVC | EnsembleClassifiers => !TextData",
    "KMeans | SpectralClustering | MeanShift | VBGMM => SmallSamples",
    "MiniBatchKMeans => MediumSamples | LargeSamples",
    "Lasso | ElasticNet => FewFeatures",
    "RidgeRegression | SVRLinear => ManyFeatures",
    "Lasso | ElasticNet | RidgeRegression | SVRLinear | SVRRBF | EnsembleRegressors => !LargeSamples",
    "SGDRegressor => LargeSamples",
    "Isomap | SpectralEmbedding | LLE => SmallSamples",
    "DRKernelApproximation => MediumSamples | LargeSamples",
)


@lru_cache(maxsize=None)
def combined_model() -> FeatureModel:
    """Technique and assumption models under one mandatory root, plus linking constraints."""
    techniques = load_bundled("ml_techniques")
    assumptions = load_bundled("modeling_assumptions")
    features = [Feature(ROOT, "ML Model Selection", Variability.MANDATORY, None)]
    for sub in (techniques, assumptions):
        for f in sub.features:
            if f.parent is None:
                f = Feature(f.id, f.display_name, Variability.MANDATORY, ROOT)
            features.append(f)
    groups = techniques.groups + assumptions.groups
    constraints = (
        techniques.constraints
        + assumptions.constraints
        + tuple(Constraint(parse_formula(text)) for text in LINKING_CONSTRAINTS)
    )
    return FeatureModel(tuple(features), groups, constraints)


def _technique(profile: DatasetProfile) -> str:
    if profile.prediction_kind is PredictionKind.CATEGORY:
        return "Classification" if profile.labeled else "Clustering"
    if profile.prediction_kind is PredictionKind.QUANTITY:
        return "Regression"
    if profile.prediction_kind is PredictionKind.JUST_LOOKING:
        return "DimensionalityReduction"
    raise SelectorError("UNMAPPED_ALGORITHM", f"no technique for prediction kind {profile.prediction_kind.value}")


def _sample_band(profile: DatasetProfile, t: SelectorThresholds) -> str:
    n = profile.sample_size
    if n < t.min_samples:
        return "BelowMinimumSamples"
    if n < t.clustering_large:
        return "SmallSamples"
    if n < t.large_dataset:
        return "MediumSamples"
    return "LargeSamples"


PREDICTION_FEATURES = {
    PredictionKind.CATEGORY: "PredictCategory",
    PredictionKind.QUANTITY: "PredictQuantity",
    PredictionKind.JUST_LOOKING: "JustLooking",
    PredictionKind.NONE: "PredictStructure",
}


def metric_feature(metric: str) -> str:
    key = metric.lower()
    if key in METRIC_FEATURES:
        return METRIC_FEATURES[key]
    if metric in METRIC_FEATURES.values():
        return metric
    raise SelectorError("UNKNOWN_METRIC", f"no feature for metric {metric!r}")


def to_configuration(
    item: AlgorithmKind,
    profile: DatasetProfile,
    criterion_metrics: Sequence[str] = ("f1",),
    thresholds: SelectorThresholds | None = None,
) -> Configuration:
    """The feature-model instance for running ``item`` on ``profile``.

    Selects the algorithm leaf, the sample-size band, labeling, feature
    dimensionality, text data type, prediction type and one leaf per metric,
    then closes the selection over ancestors and mandatory children.
    """
    item = AlgorithmKind(item)
    if item.terminal:
        raise SelectorError("TERMINAL_PLACEHOLDER", f"{item.value} has no configuration")
    t = thresholds or SelectorThresholds()
    model = combined_model()
    technique = _technique(profile)
    leaf = TECHNIQUE_LEAVES[technique].get(item)
    if leaf is None:
        raise SelectorError("UNMAPPED_ALGORITHM", f"{item.value} has no leaf under {technique}")

    wanted = {
        leaf,
        _sample_band(profile, t),
        "Labeled" if profile.labeled else "Unlabeled",
        "FewFeatures" if profile.few_features else "ManyFeatures",
        PREDICTION_FEATURES[profile.prediction_kind],
    }
    if profile.text_data:
        wanted.add("TextData")
    wanted.update(metric_feature(m) for m in criterion_metrics)

    selected: set[str] = set()
    todo = list(wanted)
    while todo:
        fid = todo.pop()
        if fid in selected:
            continue
        selected.add(fid)
        parent = model.by_id[fid].parent
        if parent is not None:
            todo.append(parent)
        todo.extend(c for c in model.children[fid] if model.by_id[c].variability is Variability.MANDATORY)

    config = Configuration(frozenset(selected))
    check = validate_configuration(model, config)
    if not check.ok:
        raise SelectorError(
            "INCONSISTENT_CONFIGURATION",
            f"{item.value} on this profile violates the feature model: " + "; ".join(map(str, check.violations)),
        )
    return config
