import dataclasses

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varisel.dataset import DatasetProfile, PredictionKind, load_heart_failure, profile
from varisel.errors import SelectorError
from varisel.fm import validate_configuration
from varisel.selector import (
    AlgorithmKind as A,
    MethodQueue,
    SelectorThresholds,
    combined_model,
    explain,
    metric_feature,
    recommend,
    to_configuration,
)

HEART = profile(load_heart_failure())


def q(**changes):
    return [a.value for a in recommend(dataclasses.replace(HEART, **changes))]


@pytest.mark.parametrize(
    "changes,expected",
    [
        ({}, ["LINEAR_SVC", "KNN", "RBF_SVC", "ENSEMBLE", "TOUGH_LUCK"]),
        ({"sample_size": 120_000}, ["SGD_CLASSIFIER", "KERNEL_APPROXIMATION", "TOUGH_LUCK"]),
        ({"sample_size": 10}, ["GET_MORE_DATA"]),
        ({"text_data": True}, ["LINEAR_SVC", "NAIVE_BAYES", "TOUGH_LUCK"]),
        (
            {"labeled": False, "known_category_count": 3},
            ["KMEANS", "SPECTRAL_EMBEDDING", "TOUGH_LUCK"],
        ),
        ({"labeled": False, "known_category_count": 3, "sample_size": 20_000}, ["MINIBATCH_KMEANS", "TOUGH_LUCK"]),
        ({"labeled": False}, ["MEANSHIFT", "VBGMM", "TOUGH_LUCK"]),
        ({"labeled": False, "sample_size": 20_000}, ["TOUGH_LUCK"]),
        (
            {"prediction_kind": PredictionKind.QUANTITY},
            ["LASSO", "ELASTICNET", "SVR_RBF", "ENSEMBLE_REGRESSOR", "TOUGH_LUCK"],
        ),
        (
            {"prediction_kind": PredictionKind.QUANTITY, "few_features": False},
            ["RIDGE", "SVR_LINEAR", "SVR_RBF", "ENSEMBLE_REGRESSOR", "TOUGH_LUCK"],
        ),
        ({"prediction_kind": PredictionKind.QUANTITY, "sample_size": 200_000}, ["SGD_REGRESSOR", "TOUGH_LUCK"]),
        ({"prediction_kind": PredictionKind.QUANTITY, "labeled": False}, ["TOUGH_LUCK"]),
        (
            {"prediction_kind": PredictionKind.JUST_LOOKING},
            ["RANDOMIZED_PCA", "ISOMAP", "SPECTRAL_EMBEDDING", "LLE", "TOUGH_LUCK"],
        ),
        (
            {"prediction_kind": PredictionKind.JUST_LOOKING, "sample_size": 20_000},
            ["RANDOMIZED_PCA", "KERNEL_APPROXIMATION", "TOUGH_LUCK"],
        ),
        ({"prediction_kind": PredictionKind.NONE}, ["TOUGH_LUCK"]),
    ],
)
def test_rule_table(changes, expected):
    assert q(**changes) == expected


def test_explain_heart():
    lines = explain(recommend(HEART))
    assert len(lines) == 5
    assert "< 100000" in lines[0] and lines[0].endswith("→ LINEAR_SVC")
    assert "LINEAR_SVC not working" in lines[1]
    assert explain(recommend(HEART)) == lines


def test_explain_get_more_data():
    lines = explain(recommend(dataclasses.replace(HEART, sample_size=10)))
    assert len(lines) == 1 and "min_samples" in lines[0]


def test_boundary_sweep():
    t = SelectorThresholds()
    for n in range(t.large_dataset - 3, t.large_dataset + 3):
        head = recommend(dataclasses.replace(HEART, sample_size=n), t).items[0]
        assert head is (A.LINEAR_SVC if n < t.large_dataset else A.SGD_CLASSIFIER)


def test_custom_thresholds():
    t = SelectorThresholds(min_samples=10, large_dataset=200, clustering_large=100, few_features=5)
    assert recommend(HEART, t).items[0] is A.SGD_CLASSIFIER
    with pytest.raises(ValueError):
        SelectorThresholds(min_samples=100, clustering_large=50)
    assert SelectorThresholds.from_dict(t.to_dict()) == t


def test_queue_invariants():
    with pytest.raises(ValueError):
        MethodQueue((A.KNN,), ("x",))
    with pytest.raises(ValueError):
        MethodQueue((A.KNN, A.KNN, A.TOUGH_LUCK), ("a", "b", "c"))
    queue = recommend(HEART)
    assert MethodQueue.from_dict(queue.to_dict()) == queue
    assert queue.trainable() == [A.LINEAR_SVC, A.KNN, A.RBF_SVC, A.ENSEMBLE]


profiles = st.builds(
    DatasetProfile,
    sample_size=st.integers(0, 300_000),
    feature_count=st.integers(1, 100),
    labeled=st.booleans(),
    prediction_kind=st.sampled_from(list(PredictionKind)),
    text_data=st.booleans(),
    few_features=st.booleans(),
    known_category_count=st.one_of(st.none(), st.integers(2, 10)),
)


@settings(max_examples=300, deadline=None)
@given(profiles)
def test_total_and_configurable(p):
    queue = recommend(p)
    assert queue.items[-1].terminal
    assert len(set(queue.items)) == len(queue.items)
    assert len(explain(queue)) == len(queue)
    model = combined_model()
    for item in queue.trainable():
        cfg = to_configuration(item, p, ["f1", "eoo"])
        assert validate_configuration(model, cfg).ok


def test_configuration_contents():
    cfg = to_configuration(A.LINEAR_SVC, HEART, ["f1"])
    assert {"Classification", "LinearSVC", "F1", "SmallSamples", "Labeled", "PredictCategory"} <= cfg.selected
    big = to_configuration(A.SGD_CLASSIFIER, dataclasses.replace(HEART, sample_size=120_000), ["f1"])
    assert {"SGDClassifier", "LargeSamples"} <= big.selected


def test_configuration_errors():
    with pytest.raises(SelectorError) as e:
        to_configuration(A.TOUGH_LUCK, HEART)
    assert e.value.code == "TERMINAL_PLACEHOLDER"
    with pytest.raises(SelectorError) as e:
        to_configuration(A.LASSO, HEART)
    assert e.value.code == "UNMAPPED_ALGORITHM"
    with pytest.raises(SelectorError) as e:
        metric_feature("zzz")
    assert e.value.code == "UNKNOWN_METRIC"
