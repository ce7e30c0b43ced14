"""Edge-recovery metrics and coefficient-driven network summaries."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
from scipy.stats import rankdata

from .core import DataError, Edge, edge_set

_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class MetricsReport:
    """Per-level edge-recovery summary of one fit against the truth."""

    per_level: dict[int, dict[str, float]]


def _upper_values(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    matrix = np.asarray(matrix, dtype=float)
    p = matrix.shape[0]
    rows, cols = np.triu_indices(p, 1)
    return matrix[rows, cols], rows, cols


def roc_auc(scores: np.ndarray, truth: Iterable[Edge]) -> float:
    """Probability that a true edge outscores a non-edge, ties counted half.

    Equivalent to the area under the ROC curve of the upper-triangle scores
    against the edge indicator (the rank-sum form).
    """
    values, rows, cols = _upper_values(scores)
    truth = edge_set(truth)
    labels = np.array([(i, j) in truth for i, j in zip(rows, cols)])
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DataError("truth must contain at least one edge and one non-edge")
    ranks = rankdata(values)
    return float((ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def precision_recall(
    ppi: np.ndarray, truth: Iterable[Edge], threshold: float = 0.5
) -> tuple[float, float]:
    """Precision and recall of the edge set {(i,j): ppi >= threshold}.

    Precision is defined as 1 when nothing is predicted, which keeps
    replicate averages well-defined; at threshold 0 every edge is predicted
    and recall is 1.
    """
    if not 0.0 <= threshold <= 1.0:
        raise DataError("threshold must lie in [0, 1]")
    values, rows, cols = _upper_values(ppi)
    truth = edge_set(truth)
    labels = np.array([(i, j) in truth for i, j in zip(rows, cols)])
    predicted = values >= threshold
    tp = int(np.count_nonzero(predicted & labels))
    fp = int(np.count_nonzero(predicted & ~labels))
    fn = int(np.count_nonzero(~predicted & labels))
    precision = 1.0 if tp + fp == 0 else tp / (tp + fp)
    recall = 1.0 if tp + fn == 0 else tp / (tp + fn)
    return precision, recall


def _ordered_edges(matrix: np.ndarray, descending: bool) -> list[Edge]:
    values, rows, cols = _upper_values(matrix)
    keys = -values if descending else values
    order = np.lexsort((cols, rows, keys))
    return [(int(rows[k]), int(cols[k])) for k in order]


def beta_sign_structure(
    beta_mean: np.ndarray, k: int
) -> tuple[frozenset[Edge], frozenset[Edge]]:
    """Top-k and bottom-k edges of the coefficient matrix by value.

    Returns ``(positive, negative)``: the k largest entries and the k
    smallest.  Raises an error if the two selections overlap (k too large for
    the number of distinct edges).
    """
    values, _, _ = _upper_values(beta_mean)
    if k < 0:
        raise DataError("k must be non-negative")
    if k > values.size:
        raise DataError(f"k={k} exceeds the {values.size} available edges")
    top = _ordered_edges(beta_mean, descending=True)[:k]
    bottom = _ordered_edges(beta_mean, descending=False)[:k]
    positive = frozenset(top)
    negative = frozenset(bottom)
    if positive & negative:
        raise DataError("top and bottom selections overlap; reduce k")
    return positive, negative


def top_k_edge_subnetworks(
    beta_mean: np.ndarray, k: int = 50
) -> tuple[frozenset[Edge], frozenset[Edge]]:
    """Sign-restricted top-k subnetworks of the coefficient matrix.

    The positive subnetwork holds the k largest strictly positive entries,
    truncated to fewer when not enough entries are strictly positive; the
    negative subnetwork mirrors this with the k smallest strictly negative
    entries.
    """
    if k < 0:
        raise DataError("k must be non-negative")
    values, rows, cols = _upper_values(beta_mean)
    matrix = np.asarray(beta_mean, dtype=float)
    top = [e for e in _ordered_edges(matrix, descending=True) if matrix[e] > 0.0][:k]
    bottom = [e for e in _ordered_edges(matrix, descending=False) if matrix[e] < 0.0][:k]
    return frozenset(top), frozenset(bottom)


def rank_nodes_by_beta(
    beta_mean: np.ndarray, edge_filter: Iterable[Edge]
) -> list[tuple[int, float]]:
    """Nodes ordered by the summed |coefficient| of their incident edges.

    Only edges in ``edge_filter`` contribute.  Descending by score, ties
    broken by node index ascending.
    """
    matrix = np.asarray(beta_mean, dtype=float)
    p = matrix.shape[0]
    scores = np.zeros(p)
    for i, j in edge_set(edge_filter):
        weight = abs(matrix[i, j])
        scores[i] += weight
        scores[j] += weight
    order = np.lexsort((np.arange(p), -scores))
    return [(int(v), float(scores[v])) for v in order]


def evaluate_fit(
    ppi_by_level: Mapping[int, np.ndarray],
    adjacency_by_level: Mapping[int, Iterable[Edge]],
    threshold: float = 0.5,
) -> MetricsReport:
    """Per-level AUC, precision and recall of inclusion probabilities."""
    per_level: dict[int, dict[str, float]] = {}
    for level in sorted(int(a) for a in ppi_by_level):
        ppi = np.asarray(ppi_by_level[level], dtype=float)
        truth = edge_set(adjacency_by_level[level])
        precision, recall = precision_recall(ppi, truth, threshold)
        values, _, _ = _upper_values(ppi)
        per_level[level] = {
            "auc": roc_auc(ppi, truth),
            "precision": precision,
            "recall": recall,
            "n_edges_est": float(np.count_nonzero(values >= threshold)),
            "n_edges_true": float(len(truth)),
        }
    return MetricsReport(per_level=per_level)
