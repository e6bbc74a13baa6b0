"""Pure-Python kernels.

Reference implementations of the learner inner loops. ``_ckernels.pyx``
mirrors every loop here statement by statement, so both backends perform the
same IEEE double operations in the same order and return bit-identical
results. Keep the two files in sync when editing either.

Inputs are float64 / int64 numpy arrays; outputs are numpy arrays or Python
scalars.
"""

from __future__ import annotations

import math

import numpy as np

# purity scores closer than this count as a tie (first candidate wins)
SPLIT_EPS = 1e-12
# logistic loss: above this margin exp(-m) replaces 1 / (1 + exp(m))
LOGIT_CUTOFF = 35.0


def hinge_fit(X, y, sw, lam: float, epochs: int):
    """Full-batch subgradient descent on the L2-regularized weighted hinge loss.

    The bias is an extra weight on a constant-1 input and is regularized with
    the others. Step size at epoch ``t`` is ``1 / (lam * t)``.
    """
    rows = X.tolist()
    ys = y.tolist()
    ws = sw.tolist()
    n = len(rows)
    d = X.shape[1]
    total = 0.0
    for i in range(n):
        total += ws[i]
    w = [0.0] * d
    b = 0.0
    for t in range(1, epochs + 1):
        eta = 1.0 / (lam * t)
        gw = [0.0] * d
        gb = 0.0
        for i in range(n):
            xi = rows[i]
            s = b
            for j in range(d):
                s += w[j] * xi[j]
            if ys[i] * s < 1.0:
                c = ws[i] * ys[i]
                for j in range(d):
                    gw[j] -= c * xi[j]
                gb -= c
        for j in range(d):
            w[j] -= eta * (lam * w[j] + gw[j] / total)
        b -= eta * (lam * b + gb / total)
    return np.array(w, dtype=np.float64), b


def rbf_kernel(A, B, gamma: float):
    """``K[i, j] = exp(-gamma * |A_i - B_j|^2)``."""
    ar = A.tolist()
    br = B.tolist()
    d = A.shape[1]
    out = []
    for a in ar:
        row = []
        for bv in br:
            s = 0.0
            for j in range(d):
                diff = a[j] - bv[j]
                s += diff * diff
            row.append(math.exp(-gamma * s))
        out.append(row)
    return np.array(out, dtype=np.float64).reshape(A.shape[0], B.shape[0])


def pegasos_kernel_fit(K, y, sw, order, lam: float):
    """Kernelized Pegasos; returns per-example weights ``alpha``.

    ``order`` lists the example drawn at each step. The running decision
    values ``f = K @ (alpha * y)`` are updated only when ``alpha`` changes.
    """
    kr = K.tolist()
    ys = y.tolist()
    ws = sw.tolist()
    n = len(ys)
    alpha = [0.0] * n
    f = [0.0] * n
    t = 0
    for i in order.tolist():
        t += 1
        if ys[i] * f[i] / (lam * t) < 1.0:
            c = ws[i]
            alpha[i] += c
            cy = c * ys[i]
            ki = kr[i]
            for k in range(n):
                f[k] += cy * ki[k]
    return np.array(alpha, dtype=np.float64)


def logistic_sgd_fit(X, y, sw, order, lam: float, eta0: float):
    """Per-example SGD on the L2-regularized weighted logistic loss.

    Step size ``eta0 / (1 + eta0 * lam * t)``; ``order`` is the visiting
    sequence across all epochs.
    """
    rows = X.tolist()
    ys = y.tolist()
    ws = sw.tolist()
    d = X.shape[1]
    w = [0.0] * d
    b = 0.0
    t = 0
    for i in order.tolist():
        t += 1
        eta = eta0 / (1.0 + eta0 * lam * t)
        xi = rows[i]
        s = b
        for j in range(d):
            s += w[j] * xi[j]
        m = ys[i] * s
        if m > LOGIT_CUTOFF:
            p = math.exp(-m)
        else:
            p = 1.0 / (1.0 + math.exp(m))
        g = -ws[i] * ys[i] * p
        for j in range(d):
            w[j] -= eta * (lam * w[j] + g * xi[j])
        b -= eta * g
    return np.array(w, dtype=np.float64), b


def knn_predict(Xtr, ytr, Xq, k: int, n_labels: int):
    """Majority label among the ``k`` nearest training rows (squared Euclidean).

    Neighbors are ranked by (distance, label index, training index); vote ties
    go to the smaller label index.
    """
    tr = Xtr.tolist()
    labels = ytr.tolist()
    n = len(tr)
    d = Xtr.shape[1]
    k = min(k, n)
    out = []
    for q in Xq.tolist():
        dist = [0.0] * n
        for i in range(n):
            s = 0.0
            xi = tr[i]
            for j in range(d):
                diff = xi[j] - q[j]
                s += diff * diff
            dist[i] = s
        taken = [False] * n
        votes = [0] * n_labels
        for _ in range(k):
            best = -1
            for i in range(n):
                if taken[i]:
                    continue
                if best < 0 or dist[i] < dist[best] or (dist[i] == dist[best] and labels[i] < labels[best]):
                    best = i
            taken[best] = True
            votes[labels[best]] += 1
        winner = 0
        for c in range(1, n_labels):
            if votes[c] > votes[winner]:
                winner = c
        out.append(winner)
    return np.array(out, dtype=np.int64)


def best_split(X, y, rows, features):
    """Best binary Gini split of ``rows`` (labels 0/1) over ``features``.

    Thresholds are midpoints between consecutive distinct sorted values;
    ``x <= threshold`` goes left. Candidates are scored by
    ``(l0^2 + l1^2) / nl + (r0^2 + r1^2) / nr`` divided by the row count
    (one minus the weighted Gini impurity); the first candidate beating the
    current best by more than ``SPLIT_EPS`` wins, scanning features in the
    given order and thresholds ascending.

    Returns ``(feature, threshold, score)``; feature is -1 when every feature
    is constant on ``rows``.
    """
    data = X.tolist()
    ys = y.tolist()
    rs = rows.tolist()
    m = len(rs)
    tot1 = 0
    for r in rs:
        tot1 += ys[r]
    tot0 = m - tot1
    best_f = -1
    best_thr = 0.0
    best_score = -1.0
    for f in features.tolist():
        ordered = sorted(rs, key=lambda r: data[r][f])
        l0 = 0
        l1 = 0
        for pos in range(1, m):
            prev = ordered[pos - 1]
            if ys[prev]:
                l1 += 1
            else:
                l0 += 1
            lo = data[prev][f]
            hi = data[ordered[pos]][f]
            if not lo < hi:
                continue
            nl = pos
            nr = m - pos
            r0 = tot0 - l0
            r1 = tot1 - l1
            score = ((l0 * l0 + l1 * l1) / nl + (r0 * r0 + r1 * r1) / nr) / m
            if score > best_score + SPLIT_EPS:
                best_score = score
                best_f = f
                best_thr = (lo + hi) / 2.0
    return best_f, best_thr, best_score
