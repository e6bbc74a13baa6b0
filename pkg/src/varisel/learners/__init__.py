"""Classification learners and prediction files."""

from .core import (
    DEFAULTS,
    TRAINABLE,
    LearnerSpec,
    TrainedModel,
    dump_model,
    load_model,
    predict,
    train,
)
from .predictions import HEADER, PredictionEntry, PredictionSet, import_predictions, write_predictions

__all__ = [
    "DEFAULTS",
    "HEADER",
    "TRAINABLE",
    "LearnerSpec",
    "PredictionEntry",
    "PredictionSet",
    "TrainedModel",
    "dump_model",
    "import_predictions",
    "load_model",
    "predict",
    "train",
    "write_predictions",
]
