"""Partition agreement: confusion matrix, Rand index, ARI, misclassifications."""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InvalidArgumentError, EAClustError

MAX_MATCH_GROUPS = 10


class UnsupportedSizeError(EAClustError):
    exit_code = 2


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray
    row_names: tuple
    col_names: tuple

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    def to_dict(self) -> dict:
        return {
            "rows": [str(r) for r in self.row_names],
            "cols": [str(c) for c in self.col_names],
            "counts": self.counts.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConfusionMatrix":
        return cls(np.array(d["counts"], dtype=np.int64), tuple(d["rows"]), tuple(d["cols"]))

    def __str__(self):
        width = max(len(str(s)) for s in (*self.row_names, *self.col_names, self.counts.max()))
        head = " " * width + " " + " ".join(str(c).rjust(width) for c in self.col_names)
        rows = [
            str(r).ljust(width) + " " + " ".join(str(v).rjust(width) for v in row)
            for r, row in zip(self.row_names, self.counts)
        ]
        return "\n".join([head, *rows])


def _coerce_pair(truth, predicted):
    truth = np.asarray(truth)
    predicted = np.asarray(predicted)
    if predicted.ndim == 2:
        predicted = np.argmax(predicted, axis=1)
    if truth.shape != predicted.shape or truth.ndim != 1:
        raise InvalidArgumentError(f"label lengths differ: {truth.shape} vs {predicted.shape}")
    return truth, predicted


def confusion(truth, predicted) -> ConfusionMatrix:
    """Cross-tabulate true classes (rows) against predicted groups (columns)."""
    truth, predicted = _coerce_pair(truth, predicted)
    rows, t_idx = np.unique(truth, return_inverse=True)
    cols, p_idx = np.unique(predicted, return_inverse=True)
    counts = np.zeros((rows.size, cols.size), dtype=np.int64)
    np.add.at(counts, (t_idx, p_idx), 1)
    return ConfusionMatrix(counts, tuple(rows.tolist()), tuple(cols.tolist()))


def contingency(truth, predicted) -> np.ndarray:
    return confusion(truth, predicted).counts


def _pair_sums(table: np.ndarray):
    table = np.asarray(table, dtype=np.int64)
    n = int(table.sum())
    sum_cells = sum(comb(int(v), 2) for v in table.ravel())
    sum_rows = sum(comb(int(v), 2) for v in table.sum(axis=1))
    sum_cols = sum(comb(int(v), 2) for v in table.sum(axis=0))
    return n, sum_cells, sum_rows, sum_cols


def rand_index(truth, predicted) -> float:
    """Fraction of observation pairs on which the two partitions agree."""
    return rand_index_from_table(contingency(truth, predicted))


def rand_index_from_table(table) -> float:
    n, cells, rows, cols = _pair_sums(table)
    if n < 2:
        raise InvalidArgumentError("the Rand index needs at least two observations")
    total = comb(n, 2)
    # agreements = pairs together in both + pairs apart in both
    return (total + 2 * cells - rows - cols) / total


def ari(truth, predicted) -> float:
    """Hubert-Arabie adjusted Rand index."""
    return ari_from_table(contingency(truth, predicted))


def ari_from_table(table) -> float:
    """ARI from a contingency table.

    When the expected and maximum index coincide (e.g. both partitions are a
    single cluster) the ARI is 1.0 if the partitions are identical and 0.0
    otherwise.
    """
    n, cells, rows, cols = _pair_sums(table)
    if n < 2:
        raise InvalidArgumentError("the ARI needs at least two observations")
    total = comb(n, 2)
    expected = rows * cols / total
    maximum = 0.5 * (rows + cols)
    if maximum == expected:
        return 1.0 if cells == rows == cols else 0.0
    return (cells - expected) / (maximum - expected)


def misclassification_count(truth, predicted) -> int:
    """Observations left off the diagonal under the best group-to-class matching."""
    return misclassification_from_table(contingency(truth, predicted))


def misclassification_from_table(table) -> int:
    table = np.asarray(table, dtype=np.int64)
    if table.shape[1] > MAX_MATCH_GROUPS:
        raise UnsupportedSizeError(
            f"exact matching supports at most {MAX_MATCH_GROUPS} predicted groups, got {table.shape[1]}"
        )
    r, c = linear_sum_assignment(table, maximize=True)
    return int(table.sum() - table[r, c].sum())


def summary(truth, predicted) -> dict:
    cm = confusion(truth, predicted)
    return {
        "confusion": cm.to_dict(),
        "rand": rand_index_from_table(cm.counts),
        "ari": ari_from_table(cm.counts),
        "misclassified": misclassification_from_table(cm.counts),
    }
