"""Access to the feature models shipped in ``varisel/models``."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

from .dsl import parse
from .model import FeatureModel

BUNDLED = ("ml_techniques", "modeling_assumptions")


def bundled_text(name: str) -> str:
    if name not in BUNDLED:
        raise KeyError(f"no bundled model {name!r}; choose from {', '.join(BUNDLED)}")
    return resources.files("varisel").joinpath("models", f"{name}.fm").read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def load_bundled(name: str) -> FeatureModel:
    return parse(bundled_text(name))
