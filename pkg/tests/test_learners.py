from fractions import Fraction

import numpy as np
import pytest

from varisel import kernels
from varisel.dataset import Column, ColumnKind, TabularDataset, load_heart_failure, stratified_split
from varisel.errors import LearnerError
from varisel.learners import (
    DEFAULTS,
    TRAINABLE,
    LearnerSpec,
    PredictionEntry,
    PredictionSet,
    dump_model,
    import_predictions,
    load_model,
    predict,
    train,
    write_predictions,
)
from varisel.learners.encoding import FeatureEncoder

NUM = ColumnKind.NUMERIC


def table(X, y, names=None):
    X = np.asarray(X, dtype=float)
    names = names or [f"x{j}" for j in range(X.shape[1])]
    cols = [Column(n, NUM) for n in names] + [Column("y", ColumnKind.CATEGORICAL)]
    rows = [tuple(float(v) for v in r) + (str(t),) for r, t in zip(X, y)]
    return TabularDataset(tuple(cols), tuple(rows), target="y")


def blobs(seed, n=100, gap=8.0):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(-gap / 2, 1, size=(n, 2)), rng.normal(gap / 2, 1, size=(n, 2))])
    y = ["a"] * n + ["b"] * n
    return X, y


def accuracy(model, ds):
    return np.mean(np.array(predict(model, ds)) == np.array(ds.labels()))


@pytest.mark.parametrize("kind", sorted(k.value for k in TRAINABLE))
def test_blobs_held_out(kind):
    Xtr, ytr = blobs(0)
    Xte, yte = blobs(1)
    model = train(LearnerSpec(kind, seed=3), table(Xtr, ytr))
    assert accuracy(model, table(Xte, yte)) == 1.0


def test_linear_svc_blobs_exact():
    Xtr, ytr = blobs(10, gap=10.0)
    Xte, yte = blobs(11, gap=10.0)
    assert accuracy(train(LearnerSpec("LINEAR_SVC"), table(Xtr, ytr)), table(Xte, yte)) == 1.0


def test_knn_k1_memorizes():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(50, 3))
    y = rng.integers(0, 2, size=50)
    ds = table(X, y)
    assert accuracy(train(LearnerSpec("KNN", {"k": 1}), ds), ds) == 1.0


def test_knn_single_point():
    ds = table([[1.0, 2.0]], ["yes"])
    model = train(LearnerSpec("KNN"), ds)
    assert predict(model, [(5.0, -3.0), (0.0, 0.0)]) == ["yes", "yes"]


def test_knn_even_tie():
    ds = table([[-1.0], [1.0]], ["b", "a"])
    model = train(LearnerSpec("KNN", {"k": 2}), ds)
    assert predict(model, [(0.0,), (0.9,), (-0.9,)]) == ["a", "a", "a"]


def test_unsupported_kind_and_hyperparameter():
    for kind in ("LASSO", "TOUGH_LUCK", "nope"):
        with pytest.raises(LearnerError) as e:
            LearnerSpec(kind)
        assert e.value.code == "UNSUPPORTED_KIND"
    with pytest.raises(LearnerError) as e:
        LearnerSpec("KNN", {"depth": 3})
    assert e.value.code == "UNKNOWN_HYPERPARAMETER"


def test_single_class_and_text():
    ds = table([[1.0], [2.0]], ["a", "a"])
    with pytest.raises(LearnerError) as e:
        train(LearnerSpec("LINEAR_SVC"), ds)
    assert e.value.code == "SINGLE_CLASS_TRAINING_SET"
    cols = (Column("t", ColumnKind.TEXT), Column("y", ColumnKind.CATEGORICAL))
    text = TabularDataset(cols, (("good movie", "p"), ("bad movie", "n"), ("good plot", "p")), target="y")
    with pytest.raises(LearnerError) as e:
        train(LearnerSpec("KNN"), text)
    assert e.value.code == "TEXT_FEATURES_UNSUPPORTED"
    nb = train(LearnerSpec("NAIVE_BAYES"), text)
    assert predict(nb, [("good good",)]) == ["p"]


def test_non_binary():
    with pytest.raises(LearnerError) as e:
        train(LearnerSpec("KNN"), table([[1.0], [2.0], [3.0]], ["a", "b", "c"]))
    assert e.value.code == "NON_BINARY_LABELS"


def test_arity_mismatch():
    model = train(LearnerSpec("KNN"), table([[1.0, 2.0], [2.0, 1.0]], ["a", "b"]))
    with pytest.raises(LearnerError) as e:
        predict(model, [(1.0,)])
    assert e.value.code == "ARITY_MISMATCH"


def test_categorical_one_hot():
    cols = (Column("c", ColumnKind.CATEGORICAL), Column("y", ColumnKind.CATEGORICAL))
    ds = TabularDataset(cols, tuple((c, "p" if c == "red" else "n") for c in ["red", "blue", "green"] * 10), target="y")
    model = train(LearnerSpec("ENSEMBLE", {"n_trees": 5}), ds)
    assert predict(model, [("red",), ("blue",), ("purple",)]) == ["p", "n", "n"]
    enc = FeatureEncoder.fit(ds.feature_columns, [(r[0],) for r in ds.rows])
    assert enc.vocab == (("blue", "green", "red"),) and enc.width == 3


HEART = load_heart_failure()
TRAIN, TEST = stratified_split(HEART, 0.2, 0)


@pytest.mark.parametrize("kind", sorted(k.value for k in TRAINABLE))
def test_determinism(kind):
    spec = LearnerSpec(kind, seed=9)
    a, b = train(spec, TRAIN), train(spec, TRAIN)
    assert dump_model(a) == dump_model(b)
    assert predict(a, TEST) == predict(b, TEST)


@pytest.mark.parametrize("kind", sorted(k.value for k in TRAINABLE))
def test_backends_agree_end_to_end(kind, monkeypatch):
    spec = LearnerSpec(kind, seed=2)
    reference = dump_model(train(spec, TRAIN))
    for name in ("hinge_fit", "rbf_kernel", "pegasos_kernel_fit", "logistic_sgd_fit", "knn_predict", "best_split"):
        monkeypatch.setattr(kernels, name, getattr(kernels.python_backend, name))
    assert dump_model(train(spec, TRAIN)) == reference


@pytest.mark.parametrize("kind", ["KNN", "LINEAR_SVC"])
def test_standardization_invariance(kind):
    rng = np.random.default_rng(8)
    X = rng.normal(size=(80, 3))
    y = (X[:, 0] - X[:, 1] + 0.3 * rng.normal(size=80) > 0).astype(int)
    Xq = rng.normal(size=(40, 3))
    scale, shift = np.array([1000.0, 0.001, 7.0]), np.array([-50.0, 3.0, 0.0])
    base = train(LearnerSpec(kind), table(X, y))
    moved = train(LearnerSpec(kind), table(X * scale + shift, y))
    assert predict(base, [tuple(r) for r in Xq]) == predict(moved, [tuple(r) for r in Xq * scale + shift])


def stump_oracle(X, y):
    """Exhaustive stump search with exact weighted Gini; first best wins."""
    n, d = X.shape
    best = None
    for f in range(d):
        values = sorted(set(X[:, f].tolist()))
        for lo, hi in zip(values, values[1:]):
            thr = (lo + hi) / 2
            left = X[:, f] <= thr
            impurity = Fraction(0)
            for side in (left, ~left):
                m = int(side.sum())
                ones = int(y[side].sum())
                impurity += Fraction(m, n) * (1 - Fraction(ones, m) ** 2 - Fraction(m - ones, m) ** 2)
            if best is None or impurity < best[0]:
                best = (impurity, f, thr)
    _, f, thr = best
    left = X[:, f] <= thr
    out = np.empty(n, dtype=int)
    for side in (left, ~left):
        ones = int(y[side].sum())
        out[side] = 1 if ones > side.sum() - ones else 0
    return out


@pytest.mark.parametrize("seed", range(8))
def test_single_stump_matches_exhaustive_search(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(20, 200))
    X = np.round(rng.normal(size=(n, 4)), 1)
    y = ((X[:, seed % 4] + rng.normal(scale=0.8, size=n)) > 0).astype(int)
    if len(set(y)) < 2:
        y[0] = 1 - y[0]
    hp = {"n_trees": 1, "max_depth": 1, "bootstrap": 0, "max_features": 4}
    model = train(LearnerSpec("ENSEMBLE", hp, seed=seed), table(X, y), labels=("0", "1"))
    got = np.array(predict(model, [tuple(r) for r in X]), dtype=int)
    assert got.tolist() == stump_oracle(X, y).tolist()


@pytest.mark.parametrize("kind", sorted(k.value for k in TRAINABLE))
def test_model_serialization(kind):
    model = train(LearnerSpec(kind, seed=1), TRAIN)
    text = dump_model(model)
    again = load_model(text)
    assert dump_model(again) == text
    assert predict(again, TEST) == predict(model, TEST)


def test_load_model_rejects_garbage():
    with pytest.raises(LearnerError):
        load_model('{"format": "other"}')


def test_defaults_cover_trainable():
    assert set(DEFAULTS) == set(TRAINABLE)


# --- prediction files ------------------------------------------------------


def write(tmp_path, text):
    p = tmp_path / "preds.csv"
    p.write_text(text, encoding="utf-8")
    return p


def test_import_round_trip(tmp_path):
    entries = [PredictionEntry(i, str(i % 2), str((i // 2) % 2), "m" if i % 3 else "f") for i in range(60)]
    ps = PredictionSet.build(entries)
    path = tmp_path / "p.csv"
    write_predictions(path, ps)
    assert path.read_text().splitlines()[0] == "row_id,y_true,y_pred,group"
    back = import_predictions(path)
    assert len(back) == 60 and back == ps


@pytest.mark.parametrize(
    "text,code",
    [
        ("row_id,y_true,y_pred,group\n1,a,b,m\n2,c,a,f\n", "NON_BINARY_LABELS"),
        ("row_id,y_true,y_pred,group\n1,a,b,m\n1,a,a,f\n", "DUPLICATE_ROW_ID"),
        ("row_id,y_true,group\n1,a,m\n", "MISSING_COLUMN"),
        ("row_id,y_true,y_pred,group\nx,a,b,m\n", "BAD_ROW_ID"),
        ("row_id,y_true,y_pred,group\n1,a,b\n", "RAGGED_ROW"),
    ],
)
def test_import_errors(tmp_path, text, code):
    with pytest.raises(LearnerError) as e:
        import_predictions(write(tmp_path, text))
    assert e.value.code == code


def test_import_custom_group_column(tmp_path):
    ps = import_predictions(write(tmp_path, "row_id,y_true,y_pred,sex\n1,1,1,M\n2,0,1,F\n"), group_column="sex")
    assert [e.group for e in ps.entries] == ["M", "F"]
    with pytest.raises(LearnerError) as e:
        import_predictions(write(tmp_path, "row_id,y_true,y_pred,group\n1,1,0,M\n"), positive_label="yes")
    assert e.value.code == "NON_BINARY_LABELS"
    one = import_predictions(write(tmp_path, "row_id,y_true,y_pred,group\n1,1,1,M\n"), positive_label="yes")
    assert one.labels == ("1", "yes")
