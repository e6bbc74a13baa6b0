"""Brute-force reference formulas, written independently of varisel.metrics.

Performance metrics are computed from expanded per-sample 0/1 vectors rather
than from the four counts; fairness metrics use plain float arithmetic on the
defining formulas.
"""

from __future__ import annotations

import numpy as np


def expand(tp, fp, fn, tn):
    y = [1] * tp + [0] * fp + [1] * fn + [0] * tn
    p = [1] * tp + [1] * fp + [0] * fn + [0] * tn
    return np.array(y), np.array(p)


def performance_oracle(tp, fp, fn, tn):
    y, p = expand(tp, fp, fn, tn)
    out = {"accuracy": float(np.mean(y == p))}
    pos, neg = y == 1, y == 0
    out["sensitivity"] = float(np.mean(p[pos] == 1)) if pos.any() else None
    out["specificity"] = float(np.mean(p[neg] == 0)) if neg.any() else None
    if out["sensitivity"] is None or out["specificity"] is None:
        out["balanced_accuracy"] = None
    else:
        out["balanced_accuracy"] = (out["sensitivity"] + out["specificity"]) / 2
    predicted_pos = p == 1
    precision = float(np.mean(y[predicted_pos] == 1)) if predicted_pos.any() else None
    recall = out["sensitivity"]
    if not (y == 1).any() and not predicted_pos.any():
        out["f1"] = None
    elif not precision or not recall:
        out["f1"] = 0.0
    else:
        out["f1"] = 2 * precision * recall / (precision + recall)
    # MCC is the Pearson correlation of the two indicator vectors
    if y.std() == 0 or p.std() == 0:
        out["mcc"] = None
    else:
        out["mcc"] = float(np.mean((y - y.mean()) * (p - p.mean())) / (y.std() * p.std()))
    return out


def eoo_oracle(P, U):
    return P["tp"] / (P["tp"] + P["fn"]) - U["tp"] / (U["tp"] + U["fn"])


def di_oracle(P, U):
    nP, nU = sum(P.values()), sum(U.values())
    return ((P["tp"] + P["fp"]) / nP) / ((U["tp"] + U["fp"]) / nU)


def abad_oracle(P, U):
    return 0.5 * (P["tp"] + P["tn"]) - (U["tp"] + U["tn"])


# one grouped matrix that yields eoo 0.375, di 15/14 and abad 3 together:
#   eoo  = 3/4 - 3/8
#   di   = (25/35) / (10/15)
#   abad = (3 + 9)/2 - (3 + 0)
AUDIT_P = {"tp": 3, "fp": 22, "fn": 1, "tn": 9}
AUDIT_U = {"tp": 3, "fp": 7, "fn": 5, "tn": 0}


def prediction_lines(P, U, protected="1", unprotected="0", pos="1", neg="0"):
    """CSV text (header included) realizing the two confusion matrices."""
    out = ["row_id,y_true,y_pred,group"]
    rid = 0
    for group, m in ((protected, P), (unprotected, U)):
        for key, (t, p) in {"tp": (pos, pos), "fp": (neg, pos), "fn": (pos, neg), "tn": (neg, neg)}.items():
            for _ in range(m.get(key, 0)):
                rid += 1
                out.append(f"{rid},{t},{p},{group}")
    return "\n".join(out) + "\n"
