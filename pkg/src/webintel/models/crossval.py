"""Cross-validation harness with per-fold fitting of every learned step.

Standardization lives inside the models; embedding reductions (LDA or
chi-squared selection) are fit on the training folds only and applied to
the held-out fold, so no label information leaks across the split.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..embeddings import chi2_select, lda_fit, lda_transform, minmax_scale
from .metrics import METRIC_NAMES, evaluate


@dataclass
class ReduceSpec:
    """How to fold embedding columns into the model input."""

    kind: str = "none"  # none | lda | chi2
    k: int = 20  # chi2: number of columns kept
    n_components: int | None = None  # lda: components (default classes-1)

    @classmethod
    def parse(cls, text: str) -> "ReduceSpec":
        """Parse CLI-style specs: "none", "lda", "lda:3", "chi2:20"."""
        kind, _, arg = text.partition(":")
        kind = kind.lower()
        if kind == "none":
            return cls("none")
        if kind == "lda":
            return cls("lda", n_components=int(arg) if arg else None)
        if kind == "chi2":
            if not arg:
                raise ValueError("chi2 reduction needs a column count, e.g. chi2:20")
            return cls("chi2", k=int(arg))
        raise ValueError(f"unknown reduction {text!r}")


@dataclass
class CvReport:
    """Per-fold metrics plus mean and sample standard deviation."""

    folds: list[dict[str, float]]
    mean: dict[str, float] = field(default_factory=dict)
    std: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.mean:
            for name in METRIC_NAMES:
                values = np.array([f[name] for f in self.folds], dtype=np.float64)
                self.mean[name] = float(np.nanmean(values))
                self.std[name] = (
                    float(np.nanstd(values, ddof=1)) if len(values) > 1 else 0.0
                )

    def summary(self, name: str) -> str:
        return f"{self.mean[name]:.4f} ± {self.std[name]:.4f}"

    def format_table(self) -> str:
        width = max(len(n) for n in METRIC_NAMES)
        lines = [f"{'metric':<{width}}  mean ± std"]
        for name in METRIC_NAMES:
            lines.append(f"{name:<{width}}  {self.summary(name)}")
        return "\n".join(lines)

    def to_json(self, path: str | Path) -> None:
        payload = {"folds": self.folds, "mean": self.mean, "std": self.std}
        Path(path).write_text(json.dumps(payload, indent=2), encoding="utf-8")


def _fold_features(X_base, X_emb, y, train, reduce_spec):
    """Train/validation matrices with the reduction fit on train only."""
    if X_emb is None:
        return X_base, None
    if reduce_spec is None or reduce_spec.kind == "none":
        return np.hstack([X_base, X_emb]), None

    if reduce_spec.kind == "lda":
        classes = len(np.unique(y[train]))
        cap = min(X_emb.shape[1], classes - 1)
        k = min(reduce_spec.n_components or cap, cap)
        model = lda_fit(X_emb[train], y[train], n_components=k)
        return np.hstack([X_base, lda_transform(model, X_emb)]), model

    if reduce_spec.kind == "chi2":
        idx, _ = chi2_select(minmax_scale(X_emb[train]), y[train], reduce_spec.k)
        return np.hstack([X_base, X_emb[:, idx]]), idx

    raise ValueError(f"unknown reduction kind {reduce_spec.kind!r}")


def cross_validate(
    model_factory,
    X,
    y,
    plan,
    X_embedding=None,
    reduce_spec: ReduceSpec | None = None,
) -> CvReport:
    """Fit on k-1 folds and score the held-out fold, for every fold.

    ``model_factory`` returns a fresh classifier with fit/predict_proba.
    Probabilities are expanded to the full class set of ``y`` so folds
    whose training data misses a rare class still score consistently.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    all_classes = np.unique(y)
    class_pos = {c: i for i, c in enumerate(all_classes)}
    y_pos = np.array([class_pos[c] for c in y], dtype=np.int64)

    fold_metrics = []
    for fold in range(plan.k):
        train, val = plan.split(fold)
        X_all, _ = _fold_features(X, X_embedding, y, train, reduce_spec)
        model = model_factory()
        model.fit(X_all[train], y[train])
        proba = model.predict_proba(X_all[val])
        expanded = np.zeros((len(val), len(all_classes)))
        for j, cls in enumerate(model.classes_):
            expanded[:, class_pos[cls]] = proba[:, j]
        fold_metrics.append(evaluate(y_pos[val], expanded))
    return CvReport(fold_metrics)
