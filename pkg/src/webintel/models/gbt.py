"""Gradient-boosted trees: multiclass softmax boosting with exact splits.

Each round fits one regression tree per class to the softmax gradient
and hessian. Splits are admitted when the loss reduction exceeds gamma
and both children carry at least the minimum hessian weight. The Dart
booster drops a seeded random subset of prior trees when computing a
round's residuals and rescales weights by the standard Dart rule; with a
zero drop rate it reproduces the standard booster bit for bit (drop
sampling and column sampling use independent seeded streams).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from ..errors import EmptyData, InvalidConfig, NonFiniteInput, UnfittedModel
from ._split import column_ranks, grow_tree, predict_tree
from .logreg import softmax


@dataclass
class GbtConfig:
    """Boosting hyperparameters; the defaults are the tuned headline set."""

    max_depth: int = 7
    min_child_weight: float = 1.0
    n_estimators: int = 165
    colsample_bytree: float = 1.0
    learning_rate: float = 0.3
    tree_method: str = "exact"
    booster: str = "dart"
    gamma: float = 1e-10
    dart_drop_rate: float = 0.1
    reg_lambda: float = 1.0
    seed: int = 42

    def problems(self) -> list[str]:
        out = []
        if self.max_depth < 1:
            out.append("max_depth must be >= 1")
        if self.min_child_weight < 0:
            out.append("min_child_weight must be >= 0")
        if self.n_estimators < 1:
            out.append("n_estimators must be >= 1")
        if not 0 < self.colsample_bytree <= 1:
            out.append("colsample_bytree must be in (0, 1]")
        if self.learning_rate <= 0:
            out.append("learning_rate must be > 0")
        if self.tree_method != "exact":
            out.append("tree_method must be 'exact'")
        if self.booster not in ("standard", "dart"):
            out.append("booster must be 'standard' or 'dart'")
        if self.gamma < 0:
            out.append("gamma must be >= 0")
        if not 0 <= self.dart_drop_rate < 1:
            out.append("dart_drop_rate must be in [0, 1)")
        if self.reg_lambda < 0:
            out.append("reg_lambda must be >= 0")
        return out

    def validate(self) -> "GbtConfig":
        problems = self.problems()
        if problems:
            raise InvalidConfig(problems)
        return self


@dataclass
class _Tree:
    class_idx: int
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    weight: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        return predict_tree(X, self.feature, self.threshold, self.left, self.right, self.weight)


class GradientBoostedTrees:
    def __init__(self, config: GbtConfig | None = None):
        self.config = (config or GbtConfig()).validate()
        self.trees_: list[_Tree] | None = None

    def fit(self, X, y) -> "GradientBoostedTrees":
        cfg = self.config
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.asarray(y)
        if X.size == 0 or len(y) == 0:
            raise EmptyData("cannot boost on zero rows")
        if not np.all(np.isfinite(X)):
            raise NonFiniteInput("X contains NaN or infinity")
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        n, d = X.shape
        c = len(self.classes_)

        # Fortran order keeps the per-feature sorted walks cache-local
        X = np.asfortranarray(X)
        sort_idx = np.asfortranarray(np.argsort(X, axis=0, kind="mergesort"))
        ranks_t, uniq_flat, uniq_off = column_ranks(X)
        Y = np.zeros((n, c))
        Y[np.arange(n), y_idx] = 1.0

        col_seq, drop_seq = np.random.SeedSequence(cfg.seed).spawn(2)
        col_rng = np.random.default_rng(col_seq)
        drop_rng = np.random.default_rng(drop_seq)
        n_cols = max(1, int(cfg.colsample_bytree * d))
        dart = cfg.booster == "dart"
        lr = cfg.learning_rate

        F = np.zeros((n, c))
        trees: list[_Tree] = []
        tree_weights: list[float] = []
        train_preds: list[np.ndarray] = []  # kept only in dart mode
        feat_gain = np.zeros(d)
        loss_history = []

        for _round in range(cfg.n_estimators):
            dropped = np.empty(0, dtype=np.int64)
            if dart and trees:
                dropped = np.flatnonzero(drop_rng.random(len(trees)) < cfg.dart_drop_rate)
            if len(dropped):
                F_used = F.copy()
                for t in dropped:
                    tree = trees[t]
                    F_used[:, tree.class_idx] -= lr * tree_weights[t] * train_preds[t]
            else:
                F_used = F

            P = softmax(F_used)
            loss_history.append(self._nll(P, y_idx))

            scale_new = 1.0 / (len(dropped) + 1.0)
            for k in range(c):
                g = P[:, k] - Y[:, k]
                h = P[:, k] * (1.0 - P[:, k])
                if n_cols < d:
                    feats = np.sort(col_rng.choice(d, size=n_cols, replace=False))
                else:
                    feats = np.arange(d)
                arrays = grow_tree(
                    X, sort_idx, ranks_t, uniq_flat, uniq_off, g, h, feats,
                    cfg.max_depth, cfg.min_child_weight, cfg.reg_lambda, cfg.gamma,
                )
                tree = _Tree(k, *arrays[:5])
                feat_gain += arrays[5]
                pred = tree.predict(X)
                trees.append(tree)
                tree_weights.append(scale_new)
                if dart:
                    train_preds.append(pred)
                F[:, k] += lr * scale_new * pred

            if len(dropped):
                shrink = len(dropped) / (len(dropped) + 1.0)
                for t in dropped:
                    tree = trees[t]
                    delta = tree_weights[t] * (shrink - 1.0)
                    F[:, tree.class_idx] += lr * delta * train_preds[t]
                    tree_weights[t] *= shrink

        loss_history.append(self._nll(softmax(F), y_idx))
        self.trees_ = trees
        self.tree_weights_ = np.array(tree_weights)
        self.feat_gain_ = feat_gain
        self.train_loss_ = np.array(loss_history)
        self._n_features = d
        return self

    @staticmethod
    def _nll(P: np.ndarray, y_idx: np.ndarray) -> float:
        return float(-np.mean(np.log(P[np.arange(len(y_idx)), y_idx] + 1e-300)))

    def decision_scores(self, X) -> np.ndarray:
        if self.trees_ is None:
            raise UnfittedModel("call fit first")
        X = np.ascontiguousarray(X, dtype=np.float64)
        F = np.zeros((len(X), len(self.classes_)))
        lr = self.config.learning_rate
        for tree, w in zip(self.trees_, self.tree_weights_):
            F[:, tree.class_idx] += lr * w * tree.predict(X)
        return F

    def predict_proba(self, X) -> np.ndarray:
        return softmax(self.decision_scores(X))

    def predict(self, X) -> np.ndarray:
        return self.classes_[self.predict_proba(X).argmax(axis=1)]

    def feature_contributions(self) -> np.ndarray:
        """Per-feature share of total split gain, summing to 1."""
        if self.trees_ is None:
            raise UnfittedModel("call fit first")
        total = self.feat_gain_.sum()
        if total <= 0:
            raise UnfittedModel("model recorded no splits")
        return self.feat_gain_ / total


@dataclass
class ContributionReport:
    """Feature contribution percentages sorted descending."""

    entries: list[tuple[str, float]] = field(default_factory=list)

    @classmethod
    def from_model(
        cls, model: GradientBoostedTrees, feature_names: list[str] | None = None
    ) -> "ContributionReport":
        shares = model.feature_contributions()
        names = feature_names or [f"f{i}" for i in range(len(shares))]
        if len(names) != len(shares):
            raise ValueError("feature_names length does not match the model")
        order = np.lexsort((np.arange(len(shares)), -shares))
        return cls([(names[i], float(shares[i]) * 100.0) for i in order])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["feature", "contribution_pct"])
            for name, pct in self.entries:
                writer.writerow([name, f"{pct:.4f}"])

    def top(self, k: int = 10) -> list[tuple[str, float]]:
        return self.entries[:k]
