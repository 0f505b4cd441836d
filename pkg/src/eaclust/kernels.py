"""Hot fitness kernel with a compiled core and a pure-Python fallback.

The compiled extension (``eaclust._kernels``) is used when it was built at
install time. Set ``EACLUST_BACKEND=python`` to force the fallback, or
``EACLUST_BACKEND=compiled`` to fail loudly when the extension is missing.
Both backends implement the same arithmetic and agree to within floating
rounding (about 1e-12 relative); each is bit-reproducible on its own.
"""
from __future__ import annotations

import math
import os

import numpy as np
from scipy import linalg
from scipy.special import logsumexp

from .mixture import EIG_REL_TOL, LOG_2PI

try:
    from ._kernels import labelled_fitness as _compiled_fitness
except ImportError:  # extension not built
    _compiled_fitness = None


def python_labelled_fitness(X: np.ndarray, labels: np.ndarray, G: int, ridge: float = 0.0) -> float:
    """Numpy implementation of the hard-label fitness; ``-inf`` if infeasible."""
    n, p = X.shape
    counts = np.bincount(labels, minlength=G)
    if counts.shape[0] > G or labels.min() < 0:
        raise ValueError(f"labels must lie in 0..{G - 1}")
    if counts.min() <= p:
        return -math.inf
    terms = np.empty((n, G))
    for g in range(G):
        Xg = X[labels == g]
        mu = Xg.mean(axis=0)
        dev = Xg - mu
        cov = dev.T @ dev / counts[g]
        if ridge:
            cov = cov + ridge * np.eye(p)
        tr = np.trace(cov)
        if not (tr > 0 and np.linalg.eigvalsh(cov)[0] > EIG_REL_TOL * tr / p):
            return -math.inf
        try:
            chol = linalg.cholesky(cov, lower=True, check_finite=False)
        except linalg.LinAlgError:
            return -math.inf
        y = linalg.solve_triangular(chol, (X - mu).T, lower=True, check_finite=False)
        logdet = 2.0 * np.log(np.diag(chol)).sum()
        terms[:, g] = math.log(counts[g] / n) - 0.5 * (p * LOG_2PI + logdet + np.einsum("ij,ij->j", y, y))
    return float(logsumexp(terms, axis=1).sum())


def compiled_labelled_fitness(X: np.ndarray, labels: np.ndarray, G: int, ridge: float = 0.0) -> float:
    if _compiled_fitness is None:
        raise ImportError("eaclust._kernels is not built; reinstall with Cython available")
    return _compiled_fitness(X, labels, G, ridge, EIG_REL_TOL)


def _select_backend():
    choice = os.environ.get("EACLUST_BACKEND", "auto").lower()
    if choice == "python":
        return "python", python_labelled_fitness
    if choice == "compiled" or (choice == "auto" and _compiled_fitness is not None):
        if _compiled_fitness is None:
            raise ImportError("EACLUST_BACKEND=compiled but eaclust._kernels is not built")
        return "compiled", compiled_labelled_fitness
    if choice != "auto":
        raise ValueError(f"unknown EACLUST_BACKEND {choice!r}")
    return "python", python_labelled_fitness


BACKEND, _fitness_impl = _select_backend()
BACKENDS = {"python": python_labelled_fitness}
if _compiled_fitness is not None:
    BACKENDS["compiled"] = compiled_labelled_fitness


def labelled_fitness(X, labels, G: int, ridge: float = 0.0) -> float:
    """Fitness of an integer labeling through the active backend.

    ``X`` must be a C-contiguous float64 matrix and ``labels`` an intp vector;
    callers in hot loops prepare both once.
    """
    return _fitness_impl(X, labels, G, ridge)
