"""Comparator clusterers: k-means, PAM k-medoids and spherical CEM.

All three return integer labelings with every group non-empty.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.spatial.distance import cdist

from .dataset import as_matrix
from .errors import InvalidArgumentError


@dataclass
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    within_ss: float
    iterations: int
    history: List[float] = field(default_factory=list)


@dataclass
class KMedoidsResult:
    labels: np.ndarray
    medoid_indices: np.ndarray
    total_cost: float
    history: List[float] = field(default_factory=list)


def _check_G(X, G):
    if not 1 <= G <= X.shape[0]:
        raise InvalidArgumentError(f"G={G} must lie in 1..n (n={X.shape[0]})")


def _sq_dists(X, centers):
    return cdist(X, centers, "sqeuclidean")


def _repair_empty(X, labels, centers, G):
    """Reseed each empty group at the point farthest from its own center.

    Returns the updated (labels, centers); points are taken from groups that
    can spare one so no new empty group appears.
    """
    counts = np.bincount(labels, minlength=G)
    for g in np.flatnonzero(counts == 0):
        own = np.einsum("ij,ij->i", X - centers[labels], X - centers[labels])
        own[counts[labels] <= 1] = -1.0
        i = int(np.argmax(own))
        counts[labels[i]] -= 1
        labels[i] = g
        counts[g] = 1
        centers[g] = X[i]
    return labels, centers


def _group_means(X, labels, G):
    counts = np.bincount(labels, minlength=G).astype(np.float64)
    sums = np.zeros((G, X.shape[1]))
    np.add.at(sums, labels, X)
    return sums / counts[:, None]


def lloyd(data, labels, G: int, max_iter: int = 1000) -> KMeansResult:
    """Lloyd iterations from an initial labeling until the partition is fixed.

    Ties in the assignment step go to the lowest group index.
    """
    X = as_matrix(data)
    labels = np.array(labels, dtype=np.intp)
    _check_G(X, G)
    labels, centers = _repair_empty(X, labels, _seed_centers_for_repair(X, labels, G), G)
    history = []
    it = 0
    for it in range(1, max_iter + 1):
        centers = _group_means(X, labels, G)
        d = _sq_dists(X, centers)
        history.append(float(d[np.arange(X.shape[0]), labels].sum()))
        new = np.argmin(d, axis=1).astype(np.intp)
        new, centers = _repair_empty(X, new, centers, G)
        if np.array_equal(new, labels):
            break
        labels = new
    centers = _group_means(X, labels, G)
    wss = float(_sq_dists(X, centers)[np.arange(X.shape[0]), labels].sum())
    history.append(wss)
    return KMeansResult(labels, centers, wss, it, history)


def _seed_centers_for_repair(X, labels, G):
    # group means where defined, the global mean elsewhere
    centers = np.tile(X.mean(axis=0), (G, 1))
    counts = np.bincount(labels, minlength=G)
    present = counts > 0
    sums = np.zeros((G, X.shape[1]))
    np.add.at(sums, labels, X)
    centers[present] = sums[present] / counts[present, None]
    return centers


def kmeanspp(X: np.ndarray, G: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: indices of ``G`` initial centers."""
    n = X.shape[0]
    idx = [int(rng.integers(n))]
    d2 = _sq_dists(X, X[idx]).ravel()
    for _ in range(1, G):
        total = d2.sum()
        if total <= 0:
            # all remaining points coincide with a center
            remaining = np.setdiff1d(np.arange(n), idx)
            nxt = int(rng.choice(remaining))
        else:
            nxt = int(rng.choice(n, p=d2 / total))
        idx.append(nxt)
        d2 = np.minimum(d2, _sq_dists(X, X[[nxt]]).ravel())
    return np.array(idx)


def kmeans(data, G: int, rng: Optional[np.random.Generator] = None, restarts: int = 25,
           max_iter: int = 1000) -> KMeansResult:
    """Best-of-``restarts`` Lloyd k-means from k-means++ seeds.

    Each restart draws from its own substream spawned from ``rng``, so the
    result does not depend on evaluation order.
    """
    X = as_matrix(data)
    _check_G(X, G)
    if restarts < 1:
        raise InvalidArgumentError("restarts must be >= 1")
    rng = np.random.default_rng(rng)
    best = None
    for sub in rng.spawn(restarts):
        seeds = kmeanspp(X, G, sub)
        labels = np.argmin(_sq_dists(X, X[seeds]), axis=1).astype(np.intp)
        labels, _ = _repair_empty(X, labels, X[seeds].copy(), G)
        res = lloyd(X, labels, G, max_iter)
        if best is None or res.within_ss < best.within_ss:
            best = res
    return best


def kmedoids(data, G: int, rng: Optional[np.random.Generator] = None, max_iter: int = 1000) -> KMedoidsResult:
    """PAM under Euclidean distance: greedy BUILD, then best-improvement SWAP.

    PAM is deterministic; ``rng`` is accepted for interface symmetry with
    :func:`kmeans` and is not consumed.
    """
    X = as_matrix(data)
    _check_G(X, G)
    n = X.shape[0]
    D = cdist(X, X)

    # BUILD
    medoids = [int(np.argmin(D.sum(axis=0)))]
    nearest = D[:, medoids[0]].copy()
    for _ in range(1, G):
        gain = np.maximum(nearest[:, None] - D, 0.0).sum(axis=0)
        gain[medoids] = -1.0
        m = int(np.argmax(gain))
        medoids.append(m)
        nearest = np.minimum(nearest, D[:, m])

    cost = float(nearest.sum())
    history = [cost]
    for _ in range(max_iter):
        best_cost, best_swap = cost, None
        is_medoid = np.zeros(n, dtype=bool)
        is_medoid[medoids] = True
        for slot in range(G):
            rest = [m for k, m in enumerate(medoids) if k != slot]
            base = D[:, rest].min(axis=1) if rest else np.full(n, np.inf)
            costs = np.minimum(base[:, None], D).sum(axis=0)
            costs[is_medoid] = np.inf
            h = int(np.argmin(costs))
            if costs[h] < best_cost - 1e-12 * max(1.0, abs(best_cost)):
                best_cost, best_swap = float(costs[h]), (slot, h)
        if best_swap is None:
            break
        medoids[best_swap[0]] = best_swap[1]
        cost = best_cost
        history.append(cost)

    medoids = np.array(medoids)
    labels = np.argmin(D[:, medoids], axis=1).astype(np.intp)
    return KMedoidsResult(labels, medoids, float(D[np.arange(n), medoids[labels]].sum()), history)


def cem_spherical(data, G: int, init, max_iter: int = 1000) -> np.ndarray:
    """Classification EM for equal weights and a shared spherical covariance.

    Alternates a C-step that assigns each observation to the component of
    highest classification log-density ``log(1/G) + log phi(x | mu_g, lambda I)``
    with an M-step updating group means and the pooled variance ``lambda``.
    Stops at a fixed partition.
    """
    X = as_matrix(data)
    n, p = X.shape
    labels = np.array(init, dtype=np.intp)
    _check_G(X, G)
    if G == 1:
        return labels
    labels, _ = _repair_empty(X, labels, _seed_centers_for_repair(X, labels, G), G)
    log_w = math.log(1.0 / G)
    for _ in range(max_iter):
        means = _group_means(X, labels, G)
        sq = _sq_dists(X, means)
        lam = sq[np.arange(n), labels].sum() / (n * p)
        if lam <= 0:
            # every point sits on its mean: the partition cannot change
            break
        logdens = log_w - 0.5 * (p * math.log(2 * math.pi * lam) + sq / lam)
        new = np.argmax(logdens, axis=1).astype(np.intp)
        new, _ = _repair_empty(X, new, means, G)
        if np.array_equal(new, labels):
            break
        labels = new
    return labels
