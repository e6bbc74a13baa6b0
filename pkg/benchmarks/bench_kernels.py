"""Time the compiled and pure-Python kernels on the same inputs.

    python benchmarks/bench_kernels.py [--n 400] [--d 12] [--repeat 3]

Also checks that both backends return identical bytes for every kernel.
"""

from __future__ import annotations

import argparse
import importlib
import time

import numpy as np

from varisel.kernels import _pykernels as py


def make_inputs(n: int, d: int, seed: int):
    rng = np.random.default_rng(seed)
    X = np.ascontiguousarray(rng.normal(size=(n, d)))
    y01 = (X[:, 0] - X[:, 1] + 0.5 * rng.normal(size=n) > 0).astype(np.int64)
    ypm = np.where(y01 == 1, 1.0, -1.0)
    sw = np.ones(n)
    order = rng.integers(0, n, size=10 * n).astype(np.int64)
    K = np.ascontiguousarray(py.rbf_kernel(X, X, 1.0 / d) + 1.0)
    rows = np.arange(n, dtype=np.int64)
    feats = np.arange(d, dtype=np.int64)
    Xq = np.ascontiguousarray(X[: n // 4] + 0.01)
    return {
        "hinge_fit": (X, ypm, sw, 0.01, 30),
        "rbf_kernel": (X, X, 1.0 / d),
        "pegasos_kernel_fit": (K, ypm, sw, order, 0.01),
        "logistic_sgd_fit": (X, ypm, sw, order, 1e-4, 0.1),
        "knn_predict": (X, y01, Xq, 5, 2),
        "best_split": (np.round(X, 2), y01, rows, feats),
    }


def best_of(fn, args, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - start)
    return min(times)


def as_bytes(result) -> bytes:
    if isinstance(result, tuple):
        return b"".join(as_bytes(r) for r in result)
    return np.asarray(result).tobytes()


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=400, help="training rows")
    p.add_argument("--d", type=int, default=12, help="features")
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    try:
        ck = importlib.import_module("varisel.kernels._ckernels")
    except ImportError:
        print("compiled kernels not built; run `python setup.py build_ext --inplace` first")
        return 1

    inputs = make_inputs(args.n, args.d, args.seed)
    print(f"n={args.n} d={args.d} best of {args.repeat}")
    print(f"{'kernel':<20}{'python s':>12}{'cython s':>12}{'speedup':>10}  same")
    for name, call_args in inputs.items():
        t_py = best_of(getattr(py, name), call_args, args.repeat)
        t_c = best_of(getattr(ck, name), call_args, args.repeat)
        same = as_bytes(getattr(py, name)(*call_args)) == as_bytes(getattr(ck, name)(*call_args))
        print(f"{name:<20}{t_py:>12.4f}{t_c:>12.4f}{t_py / max(t_c, 1e-9):>9.1f}x  {'yes' if same else 'NO'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
