"""URL embedding ingestion, reduction, and summary statistics.

Embedding vectors are produced externally (transformer exporters write
the ``url,e0,...,e{d-1}`` CSV format) or by the deterministic hashed
character n-gram fallback below. Reductions are supervised: linear
discriminant analysis on the between/within-class scatter pair, and
chi-squared scoring of nonnegative (min-max scaled) columns.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from .errors import (
    BadHeader,
    DuplicateUrl,
    EmptyVector,
    KTooLarge,
    NegativeInput,
    NonFiniteValue,
    SingularScatter,
    TooFewSamples,
)


class EmbeddingSource(enum.Enum):
    DISTILBERT = "Distilbert"
    LONGFORMER = "Longformer"
    CHAR_NGRAM = "CharNgram"


@dataclass
class EmbeddingTable:
    source: EmbeddingSource
    dim: int
    rows: dict[str, np.ndarray]

    def matrix_for(self, urls: list[str]) -> np.ndarray:
        """Stack vectors for ``urls`` in order; KeyError on missing URLs."""
        return np.stack([self.rows[u] for u in urls])


def import_embeddings(
    path: str | Path, source: EmbeddingSource = EmbeddingSource.DISTILBERT
) -> EmbeddingTable:
    """Load an embedding CSV with header ``url,e0,...,e{d-1}``.

    Raises:
        BadHeader: malformed header.
        DuplicateUrl: the same URL appears twice.
        NonFiniteValue: any NaN or infinite component.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "url" or len(header) < 2:
            raise BadHeader(f"{path}: header must be url,e0,...,e{{d-1}}")
        dim = len(header) - 1
        if header[1:] != [f"e{i}" for i in range(dim)]:
            raise BadHeader(f"{path}: embedding columns must be e0..e{dim - 1}")
        rows: dict[str, np.ndarray] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != dim + 1:
                raise BadHeader(f"{path}:{lineno}: expected {dim + 1} fields")
            url = row[0]
            if url in rows:
                raise DuplicateUrl(f"{path}:{lineno}: duplicate url {url!r}")
            vec = np.array([float(v) for v in row[1:]], dtype=np.float64)
            if not np.all(np.isfinite(vec)):
                raise NonFiniteValue(f"{path}:{lineno}: non-finite value for {url!r}")
            rows[url] = vec
    return EmbeddingTable(source=source, dim=dim, rows=rows)


def char_ngram_embedding(url: str, dim: int = 64, n: int = 3) -> np.ndarray:
    """Deterministic hashed character n-gram embedding, L2-normalized.

    Stand-in for transformer vectors when none are available. Hashing
    uses BLAKE2b so results are stable across processes and platforms.
    """
    if dim < 1 or n < 1:
        raise ValueError("dim and n must be positive")
    vec = np.zeros(dim, dtype=np.float64)
    if not url:
        return vec
    grams = [url[i : i + n] for i in range(len(url) - n + 1)] or [url]
    for gram in grams:
        digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
        vec[int.from_bytes(digest, "little") % dim] += 1.0
    norm = math.sqrt(float(vec @ vec))
    return vec / norm if norm > 0 else vec


def embedding_mean(vector) -> float:
    """Arithmetic mean of the vector components."""
    arr = np.asarray(vector, dtype=np.float64)
    if arr.size == 0:
        raise EmptyVector("cannot average an empty vector")
    return float(arr.mean())


@dataclass
class LdaModel:
    classes: np.ndarray
    class_means: np.ndarray  # (c, d)
    overall_mean: np.ndarray  # (d,)
    projection: np.ndarray  # (d, k), columns sorted by eigenvalue descending
    eigenvalues: np.ndarray  # (k,)


def lda_fit(X, y, n_components: int | None = None) -> LdaModel:
    """Fit a discriminant projection from the scatter-matrix eigenproblem.

    Solves the generalized symmetric problem on (between-class,
    within-class) scatter with a relative ridge on the within-class
    diagonal for invertibility.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    n, d = X.shape
    classes, y_idx = np.unique(y, return_inverse=True)
    c = len(classes)
    if n <= c:
        raise TooFewSamples(f"need more than {c} rows, got {n}")
    max_components = min(d, c - 1)
    if n_components is None:
        n_components = max_components
    if not 1 <= n_components <= max_components:
        raise ValueError(
            f"n_components must be in [1, {max_components}], got {n_components}"
        )

    overall_mean = X.mean(axis=0)
    class_means = np.zeros((c, d))
    sw = np.zeros((d, d))
    sb = np.zeros((d, d))
    for k in range(c):
        Xk = X[y_idx == k]
        mu_k = Xk.mean(axis=0)
        class_means[k] = mu_k
        centered = Xk - mu_k
        sw += centered.T @ centered
        diff = mu_k - overall_mean
        sb += len(Xk) * np.outer(diff, diff)

    eps = 1e-6 * np.trace(sw) / d
    if eps <= 0:
        eps = 1e-12
    sw_ridged = sw + eps * np.eye(d)
    try:
        eigvals, eigvecs = scipy.linalg.eigh(sb, sw_ridged)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise SingularScatter(str(exc)) from exc

    order = np.argsort(eigvals)[::-1][:n_components]
    return LdaModel(
        classes=classes,
        class_means=class_means,
        overall_mean=overall_mean,
        projection=eigvecs[:, order],
        eigenvalues=eigvals[order],
    )


def lda_transform(model: LdaModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    return (X - model.overall_mean) @ model.projection


def minmax_scale(X) -> np.ndarray:
    """Scale each column to [0, 1]; constant columns map to 0."""
    X = np.asarray(X, dtype=np.float64)
    mins = X.min(axis=0)
    spans = X.max(axis=0) - mins
    spans_safe = np.where(spans > 0, spans, 1.0)
    scaled = (X - mins) / spans_safe
    scaled[:, spans == 0] = 0.0
    return scaled


def chi2_select(X, y, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Top-k columns by the chi-squared statistic of class-wise sums.

    Observed values are per-class column sums; expected values follow the
    class priors. Ties break toward the lower column index. ``X`` must be
    nonnegative (min-max scale signed data first).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    n, d = X.shape
    if np.any(X < 0):
        raise NegativeInput("chi-squared requires nonnegative inputs")
    if k > d:
        raise KTooLarge(f"k={k} exceeds {d} columns")
    if k < 1:
        raise ValueError("k must be positive")

    classes, y_idx = np.unique(y, return_inverse=True)
    c = len(classes)
    observed = np.zeros((c, d))
    np.add.at(observed, y_idx, X)
    priors = np.bincount(y_idx, minlength=c) / n
    totals = X.sum(axis=0)
    expected = np.outer(priors, totals)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(expected > 0, (observed - expected) ** 2 / expected, 0.0)
    scores = terms.sum(axis=0)

    order = np.lexsort((np.arange(d), -scores))[:k]
    return order, scores[order]
