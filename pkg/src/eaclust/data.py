"""CSV ingestion, bundled fixtures and a seeded Gaussian mixture sampler."""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .dataset import Dataset
from .errors import DataError, FactorizationError

FIXTURE_DIR = Path(__file__).resolve().parent / "data"

#: expected class sizes of each fixture, as cross-tabulated in the reference analyses
FIXTURE_CLASS_SIZES = {
    "wine": {"Barolo": 59, "Grignolino": 71, "Barbera": 48},
    "banknote": {"counterfeit": 100, "genuine": 100},
    "voles": {"californicus": 41, "ochrogaster": 45},
}
FIXTURE_SHAPES = {"wine": (178, 13), "banknote": (200, 6), "voles": (86, 7)}


@dataclass(frozen=True)
class DataSpec:
    path: str
    truth_column: Optional[str | int] = None
    feature_columns: Optional[Sequence[str | int]] = None
    standardize: bool = False


@dataclass(frozen=True)
class SyntheticSpec:
    weights: Sequence[float]
    means: Sequence[Sequence[float]]
    covariances: Sequence[Sequence[Sequence[float]]]
    n: int
    seed: int = 0

    @property
    def G(self) -> int:
        return len(self.weights)


def _resolve_column(header, col, what):
    if isinstance(col, int) or (isinstance(col, str) and col.isdigit() and col not in header):
        idx = int(col)
        if not 0 <= idx < len(header):
            raise DataError(f"{what} index {idx} out of range ({len(header)} columns)")
        return idx
    if col not in header:
        raise DataError(f"{what} {col!r} not in header {header}")
    return header.index(col)


def load_csv(spec: DataSpec | str) -> Dataset:
    """Read a headered numeric CSV into a :class:`Dataset`.

    The truth column, when named, may hold any strings; every feature cell
    must parse as a finite float.

    Raises:
        DataError: on a missing file, missing header, non-numeric or non-finite
            cell (with its row and column), or a constant column under
            standardization.
    """
    if isinstance(spec, (str, os.PathLike)):
        spec = DataSpec(str(spec))
    path = Path(spec.path)
    if not path.is_file():
        raise DataError(f"data file not found: {path}")
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    rows = [r for r in rows if r]
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    if not body:
        raise DataError(f"{path}: header but no data rows")

    truth_idx = None if spec.truth_column is None else _resolve_column(header, spec.truth_column, "truth column")
    if spec.feature_columns:
        feat_idx = [_resolve_column(header, c, "feature column") for c in spec.feature_columns]
    else:
        feat_idx = [j for j in range(len(header)) if j != truth_idx]
    if not feat_idx:
        raise DataError(f"{path}: no feature columns")

    X = np.empty((len(body), len(feat_idx)))
    truth = []
    for i, row in enumerate(body):
        line = i + 2
        if len(row) != len(header):
            raise DataError(f"{path}:{line}: expected {len(header)} fields, found {len(row)}")
        for k, j in enumerate(feat_idx):
            cell = row[j].strip()
            try:
                v = float(cell)
            except ValueError:
                raise DataError(f"{path}:{line}: column {header[j]!r} has non-numeric value {cell!r}") from None
            if not math.isfinite(v):
                raise DataError(f"{path}:{line}: column {header[j]!r} has non-finite value {cell!r}")
            X[i, k] = v
        if truth_idx is not None:
            truth.append(row[truth_idx].strip())

    ds = Dataset(
        X,
        np.array(truth, dtype=object) if truth_idx is not None else None,
        [header[j] for j in feat_idx],
        path.stem,
    )
    return ds.standardized() if spec.standardize else ds


def read_header(path) -> list:
    """Column names from the first row of a CSV file."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"data file not found: {path}")
    with open(path, newline="", encoding="utf-8") as f:
        for row in csv.reader(f):
            if row:
                return [h.strip() for h in row]
    raise DataError(f"{path}: empty file")


def write_csv(data: Dataset, path, truth_column: str = "class") -> None:
    """Write ``data`` so that :func:`load_csv` reproduces it exactly."""
    names = list(data.feature_names or [f"x{j + 1}" for j in range(data.p)])
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(([truth_column] if data.truth is not None else []) + names)
        for i in range(data.n):
            cells = [repr(float(v)) for v in data.observations[i]]
            if data.truth is not None:
                cells.insert(0, str(data.truth[i]))
            w.writerow(cells)


def fixture_path(name: str) -> Path:
    return FIXTURE_DIR / f"{name}.csv"


def available_fixtures():
    return sorted(name for name in FIXTURE_CLASS_SIZES if fixture_path(name).is_file())


def load_fixture(name: str, standardize: bool = False, features: Optional[Sequence[str | int]] = None) -> Dataset:
    """Load a bundled dataset by name (``wine``, ``banknote`` or ``voles``)."""
    if name not in FIXTURE_CLASS_SIZES:
        raise DataError(f"unknown fixture {name!r}; known: {sorted(FIXTURE_CLASS_SIZES)}")
    path = fixture_path(name)
    if not path.is_file():
        raise DataError(
            f"fixture {name!r} is not bundled; place a CSV with a 'class' column at {path} "
            f"(see {FIXTURE_DIR / 'README.md'})"
        )
    return load_csv(DataSpec(str(path), "class", features, standardize))


def check_fixture(data: Dataset, name: str) -> None:
    """Validate shape and class sizes of a loaded fixture."""
    n, p = FIXTURE_SHAPES[name]
    if data.n != n:
        raise DataError(f"{name}: expected {n} rows, found {data.n}")
    labels, counts = np.unique(data.truth, return_counts=True)
    want = sorted(FIXTURE_CLASS_SIZES[name].values())
    if sorted(counts.tolist()) != want:
        raise DataError(f"{name}: class sizes {dict(zip(labels, counts))} do not match {FIXTURE_CLASS_SIZES[name]}")


def sample_mixture(spec: SyntheticSpec) -> Dataset:
    """Draw ``spec.n`` points from a Gaussian mixture; truth is the component index."""
    weights = np.asarray(spec.weights, dtype=np.float64)
    means = np.asarray(spec.means, dtype=np.float64)
    covs = np.asarray(spec.covariances, dtype=np.float64)
    G = weights.size
    if means.shape[0] != G or covs.shape[:2] != (G, means.shape[1]) or covs.shape[1] != covs.shape[2]:
        raise DataError("weights, means and covariances disagree on G or p")
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise DataError("weights must be a probability vector")
    chols = []
    for g in range(G):
        if not np.allclose(covs[g], covs[g].T):
            raise FactorizationError(g, f"covariance of component {g} is not symmetric")
        try:
            chols.append(np.linalg.cholesky(covs[g]))
        except np.linalg.LinAlgError:
            raise FactorizationError(g) from None
    rng = np.random.default_rng(spec.seed)
    comp = rng.choice(G, size=spec.n, p=weights)
    z = rng.standard_normal((spec.n, means.shape[1]))
    X = np.empty_like(z)
    for g in range(G):
        idx = comp == g
        X[idx] = means[g] + z[idx] @ chols[g].T
    return Dataset(X, comp, [f"x{j + 1}" for j in range(means.shape[1])], "synthetic")


def x2_like_spec(n: int = 300, seed: int = 0) -> SyntheticSpec:
    """Three 2-d components that defeat equal-radius spherical clustering.

    A long horizontal ellipse, a compact blob off its right tip and a tall
    vertical ellipse above it. The components are far apart in Mahalanobis
    distance, so hard and soft Gaussian mixture fits agree, while the k-means
    bisectors cut off the tips of both ellipses.
    """
    return SyntheticSpec(
        weights=[0.4, 0.3, 0.3],
        means=[[0.0, 0.0], [15.0, 0.0], [4.0, 9.0]],
        covariances=[
            [[16.0, 0.0], [0.0, 0.16]],
            [[0.25, 0.0], [0.0, 0.25]],
            [[0.16, 0.0], [0.0, 4.0]],
        ],
        n=n,
        seed=seed,
    )
