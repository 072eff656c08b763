"""Decision tree classifier with exhaustive exact split search.

Candidate thresholds are the midpoints of consecutive distinct sorted
feature values. Ties between equal-gain splits resolve to the lower
feature index, then the lower threshold, which makes fits reproducible
and lets tests compare against brute-force enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyData


@dataclass
class _Node:
    feature: int = -1
    threshold: float = 0.0
    left: "_Node | None" = None
    right: "_Node | None" = None
    dist: np.ndarray | None = None  # class distribution at leaves

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0


def _impurity(counts: np.ndarray, criterion: str) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    if criterion == "gini":
        return float(1.0 - np.sum(p * p))
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def _best_split(X, y_idx, rows, n_classes, criterion, min_child, features):
    """Best (gain, feature, threshold) over the given rows, or None."""
    counts = np.bincount(y_idx[rows], minlength=n_classes).astype(np.float64)
    n = len(rows)
    parent = _impurity(counts, criterion)
    best = None
    for f in features:
        values = X[rows, f]
        order = np.argsort(values, kind="mergesort")
        sorted_vals = values[order]
        sorted_y = y_idx[rows][order]
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), sorted_y] = 1.0
        left_counts = np.cumsum(onehot, axis=0)
        boundaries = np.flatnonzero(sorted_vals[1:] > sorted_vals[:-1])
        for idx in boundaries:
            n_left = idx + 1
            n_right = n - n_left
            if n_left < min_child or n_right < min_child:
                continue
            lc = left_counts[idx]
            rc = counts - lc
            gain = parent - (
                n_left / n * _impurity(lc, criterion)
                + n_right / n * _impurity(rc, criterion)
            )
            if best is None or gain > best[0] + 1e-15:
                thr = (sorted_vals[idx] + sorted_vals[idx + 1]) / 2.0
                best = (gain, f, thr)
    if best is not None and best[0] <= 1e-15:
        return None
    return best


class DecisionTreeClassifier:
    def __init__(
        self,
        max_depth: int = 10,
        min_child: int = 1,
        criterion: str = "gini",
    ):
        if max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if criterion not in ("gini", "entropy"):
            raise ValueError(f"unknown criterion {criterion!r}")
        self.max_depth = max_depth
        self.min_child = min_child
        self.criterion = criterion

    def fit(
        self,
        X,
        y,
        rng: np.random.Generator | None = None,
        max_features: int | None = None,
        n_classes: int | None = None,
    ):
        """Fit on X, y. When ``n_classes`` is given, y must already hold
        class indices in [0, n_classes); leaf distributions then span the
        full class set even if this sample misses some classes."""
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        if len(y) == 0:
            raise EmptyData("cannot fit a tree on zero rows")
        if n_classes is None:
            self.classes_, y_idx = np.unique(y, return_inverse=True)
            self._n_classes = len(self.classes_)
        else:
            self.classes_ = np.arange(n_classes)
            y_idx = y.astype(np.int64)
            self._n_classes = n_classes
        self._rng = rng
        self._max_features = max_features
        self.root_ = self._grow(X, y_idx, np.arange(len(y)), depth=0)
        return self

    def _candidate_features(self, d: int) -> np.ndarray:
        if self._max_features is None or self._max_features >= d or self._rng is None:
            return np.arange(d)
        picked = self._rng.choice(d, size=self._max_features, replace=False)
        return np.sort(picked)

    def _grow(self, X, y_idx, rows, depth) -> _Node:
        counts = np.bincount(y_idx[rows], minlength=self._n_classes).astype(np.float64)
        node = _Node(dist=counts / counts.sum())
        if depth >= self.max_depth or counts.max() == counts.sum():
            return node
        split = _best_split(
            X, y_idx, rows, self._n_classes, self.criterion, self.min_child,
            self._candidate_features(X.shape[1]),
        )
        if split is None:
            return node
        _, f, thr = split
        mask = X[rows, f] <= thr
        node.feature = f
        node.threshold = thr
        node.left = self._grow(X, y_idx, rows[mask], depth + 1)
        node.right = self._grow(X, y_idx, rows[~mask], depth + 1)
        return node

    def predict_proba(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.zeros((len(X), self._n_classes))
        for i, x in enumerate(X):
            node = self.root_
            while not node.is_leaf:
                node = node.left if x[node.feature] <= node.threshold else node.right
            out[i] = node.dist
        return out

    def predict(self, X) -> np.ndarray:
        return self.classes_[self.predict_proba(X).argmax(axis=1)]


class RandomForestClassifier:
    """Bagged trees; per-split feature subsampling is seeded and optional.

    The headline configuration keeps max_features equal to the full
    feature count, so feature subsampling is off unless asked for.
    """

    def __init__(
        self,
        n_trees: int = 100,
        max_depth: int = 25,
        min_child: int = 1,
        max_features: int | None = None,
        bootstrap: bool = True,
        seed: int = 42,
    ):
        if n_trees < 1:
            raise ValueError("n_trees must be at least 1")
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_child = min_child
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.seed = seed

    def fit(self, X, y) -> "RandomForestClassifier":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        if len(y) == 0:
            raise EmptyData("cannot fit a forest on zero rows")
        self.classes_ = np.unique(y)
        y_idx = np.searchsorted(self.classes_, y)
        n = len(y)
        self.trees_: list[DecisionTreeClassifier] = []
        seeds = np.random.SeedSequence(self.seed).spawn(self.n_trees)
        for seq in seeds:
            rng = np.random.default_rng(seq)
            rows = rng.integers(0, n, size=n) if self.bootstrap else np.arange(n)
            tree = DecisionTreeClassifier(
                max_depth=self.max_depth,
                min_child=self.min_child,
                criterion="gini",
            )
            tree.fit(
                X[rows],
                y_idx[rows],
                rng=rng,
                max_features=self.max_features,
                n_classes=len(self.classes_),
            )
            self.trees_.append(tree)
        return self

    def predict_proba(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        total = np.zeros((len(X), len(self.classes_)))
        for tree in self.trees_:
            total += tree.predict_proba(X)
        return total / len(self.trees_)

    def predict(self, X) -> np.ndarray:
        return self.classes_[self.predict_proba(X).argmax(axis=1)]
