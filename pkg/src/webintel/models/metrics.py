"""Classification metrics computed from predicted class probabilities.

Multiclass precision/recall/F1 are macro-averaged, MCC uses the
generalized (covariance) form, and ROC AUC is the rank statistic
(equivalent to trapezoidal integration of the ROC curve), macro
one-vs-rest for more than two classes. Top-k ties resolve toward the
lower class index.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.stats import rankdata

from ..errors import ShapeMismatch

METRIC_NAMES = (
    "accuracy",
    "roc_auc",
    "f1",
    "mcc",
    "precision",
    "recall",
    "top2_accuracy",
    "top3_accuracy",
)


def _validate(y_true, proba) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y_true, dtype=np.int64)
    P = np.asarray(proba, dtype=np.float64)
    if P.ndim != 2 or y.ndim != 1 or len(y) != len(P):
        raise ShapeMismatch(f"y{y.shape} vs proba{P.shape}")
    if len(y) == 0:
        raise ShapeMismatch("empty prediction set")
    sums = P.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > 1e-6):
        raise ShapeMismatch("probability rows must sum to 1")
    if y.min() < 0 or y.max() >= P.shape[1]:
        raise ShapeMismatch("labels out of range for probability columns")
    return y, P


def accuracy(y_true, proba) -> float:
    y, P = _validate(y_true, proba)
    return float(np.mean(P.argmax(axis=1) == y))


def top_k_accuracy(y_true, proba, k: int) -> float:
    """Fraction of rows whose true class is among the k highest scores."""
    y, P = _validate(y_true, proba)
    k = min(k, P.shape[1])
    # stable sort on -P keeps the lower class index first on ties
    ranked = np.argsort(-P, axis=1, kind="stable")[:, :k]
    return float(np.mean((ranked == y[:, None]).any(axis=1)))


def confusion_matrix(y_true, y_pred, n_classes: int) -> np.ndarray:
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(y_true), np.asarray(y_pred)), 1)
    return cm


def precision_recall_f1(y_true, proba) -> tuple[float, float, float]:
    """Binary scores for two classes (positive = class 1), macro otherwise."""
    y, P = _validate(y_true, proba)
    c = P.shape[1]
    cm = confusion_matrix(y, P.argmax(axis=1), c)
    tp = np.diag(cm).astype(np.float64)
    pred_tot = cm.sum(axis=0).astype(np.float64)
    true_tot = cm.sum(axis=1).astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        prec = np.where(pred_tot > 0, tp / pred_tot, 0.0)
        rec = np.where(true_tot > 0, tp / true_tot, 0.0)
        f1 = np.where(prec + rec > 0, 2 * prec * rec / (prec + rec), 0.0)
    if c == 2:
        return float(prec[1]), float(rec[1]), float(f1[1])
    return float(prec.mean()), float(rec.mean()), float(f1.mean())


def mcc(y_true, proba) -> float:
    """Matthews correlation; the generalized form for many classes."""
    y, P = _validate(y_true, proba)
    c = P.shape[1]
    y_pred = P.argmax(axis=1)
    if c == 2:
        cm = confusion_matrix(y, y_pred, 2)
        tn, fp, fn, tp = cm[0, 0], cm[0, 1], cm[1, 0], cm[1, 1]
        denom = math.sqrt(
            float(tp + fp) * float(tp + fn) * float(tn + fp) * float(tn + fn)
        )
        return (tp * tn - fp * fn) / denom if denom > 0 else 0.0
    cm = confusion_matrix(y, y_pred, c).astype(np.float64)
    s = cm.sum()
    correct = np.trace(cm)
    pred_tot = cm.sum(axis=0)
    true_tot = cm.sum(axis=1)
    cov = correct * s - pred_tot @ true_tot
    denom = math.sqrt(s * s - pred_tot @ pred_tot) * math.sqrt(s * s - true_tot @ true_tot)
    return float(cov / denom) if denom > 0 else 0.0


def _binary_auc(is_positive: np.ndarray, scores: np.ndarray) -> float:
    n_pos = int(is_positive.sum())
    n_neg = len(is_positive) - n_pos
    if n_pos == 0 or n_neg == 0:
        return math.nan
    ranks = rankdata(scores)  # average ranks handle score ties
    rank_sum = float(ranks[is_positive].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def roc_auc(y_true, proba) -> float:
    """Rank-based AUC; one-vs-rest macro average for multiclass."""
    y, P = _validate(y_true, proba)
    c = P.shape[1]
    if c == 2:
        return _binary_auc(y == 1, P[:, 1])
    aucs = [
        _binary_auc(y == k, P[:, k])
        for k in range(c)
        if 0 < int(np.sum(y == k)) < len(y)
    ]
    return float(np.mean(aucs)) if aucs else math.nan


def evaluate(y_true, proba) -> dict[str, float]:
    """All scoring metrics for one prediction set, keyed by METRIC_NAMES."""
    prec, rec, f1 = precision_recall_f1(y_true, proba)
    return {
        "accuracy": accuracy(y_true, proba),
        "roc_auc": roc_auc(y_true, proba),
        "f1": f1,
        "mcc": mcc(y_true, proba),
        "precision": prec,
        "recall": rec,
        "top2_accuracy": top_k_accuracy(y_true, proba, 2),
        "top3_accuracy": top_k_accuracy(y_true, proba, 3),
    }
