from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class Dataset:
    """An ``n x p`` observation matrix with optional ground truth.

    The matrix is copied to a read-only, C-contiguous float64 array on
    construction, so a ``Dataset`` can be shared freely between threads.
    """

    observations: np.ndarray
    truth: Optional[np.ndarray] = None
    feature_names: Optional[Sequence[str]] = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        X = np.array(self.observations, dtype=np.float64, order="C", copy=True)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DataError(f"observations must be a non-empty 2-d matrix, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            bad = np.argwhere(~np.isfinite(X))[0]
            raise DataError(f"non-finite value at row {bad[0]}, column {bad[1]}")
        X.setflags(write=False)
        object.__setattr__(self, "observations", X)

        if self.truth is not None:
            t = np.asarray(self.truth)
            if t.ndim != 1 or t.shape[0] != X.shape[0]:
                raise DataError(f"truth has {t.size} entries for {X.shape[0]} observations")
            t = t.copy()
            t.setflags(write=False)
            object.__setattr__(self, "truth", t)

        if self.feature_names is not None:
            names = tuple(str(s) for s in self.feature_names)
            if len(names) != X.shape[1]:
                raise DataError(f"{len(names)} feature names for {X.shape[1]} columns")
            object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.observations.shape[0]

    @property
    def p(self) -> int:
        return self.observations.shape[1]

    def select(self, columns: Sequence[str | int]) -> "Dataset":
        """Return a dataset restricted to ``columns`` (names or indices)."""
        idx = [self.column_index(c) for c in columns]
        names = None if self.feature_names is None else [self.feature_names[i] for i in idx]
        return Dataset(self.observations[:, idx], self.truth, names, self.name)

    def column_index(self, column: str | int) -> int:
        if isinstance(column, (int, np.integer)):
            if not 0 <= column < self.p:
                raise DataError(f"column index {column} out of range for p={self.p}")
            return int(column)
        if self.feature_names is None or column not in self.feature_names:
            raise DataError(f"unknown column {column!r}")
        return self.feature_names.index(column)

    def standardized(self) -> "Dataset":
        """Per-column ``(x - mean) / sd`` with the population sd."""
        X = self.observations
        sd = X.std(axis=0)
        const = np.flatnonzero(sd == 0)
        if const.size:
            col = const[0] if self.feature_names is None else self.feature_names[const[0]]
            raise DataError(f"cannot standardize constant column {col!r}")
        Z = (X - X.mean(axis=0)) / sd
        # second centering pass removes the residual mean left by rounding
        Z = Z - Z.mean(axis=0)
        return Dataset(Z, self.truth, self.feature_names, self.name)


def as_matrix(data) -> np.ndarray:
    """Observation matrix of a :class:`Dataset` or anything array-like."""
    if isinstance(data, Dataset):
        return data.observations
    X = np.asarray(data, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    return X
