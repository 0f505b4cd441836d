"""Gaussian mixture kernel: densities, hard-label estimates, fitness, EM, BIC.

Hard labelings are held as integer vectors ``labels`` with values in
``0..G-1``; :func:`one_hot` and :func:`as_labels` convert to and from the
``n x G`` indicator matrix form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, NamedTuple

import numpy as np
from scipy import linalg
from scipy.special import logsumexp

from .dataset import as_matrix
from .errors import (
    DegeneracyError,
    FactorizationError,
    InfeasibleLabelingError,
    InvalidArgumentError,
)

LOG_2PI = math.log(2.0 * math.pi)
#: relative eigenvalue floor for a covariance estimate to count as positive definite
EIG_REL_TOL = 1e-10


@dataclass(frozen=True)
class ComponentParams:
    weight: float
    mean: np.ndarray
    covariance: np.ndarray


@dataclass(frozen=True)
class MixtureParams:
    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise InvalidArgumentError("a mixture needs at least one component")
        object.__setattr__(self, "components", comps)

    @property
    def G(self) -> int:
        return len(self.components)

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.components])

    @property
    def means(self) -> np.ndarray:
        return np.array([c.mean for c in self.components])

    @property
    def covariances(self) -> np.ndarray:
        return np.array([c.covariance for c in self.components])


@dataclass(frozen=True)
class ModelScore:
    log_likelihood: float
    free_params: int
    n_obs: int

    @property
    def bic(self) -> float:
        return bic(self.log_likelihood, self.free_params, self.n_obs)

    def to_dict(self) -> dict:
        return {
            "log_likelihood": self.log_likelihood,
            "free_params": self.free_params,
            "n_obs": self.n_obs,
            "bic": self.bic,
        }


# -- label representation ---------------------------------------------------

def one_hot(labels, G: int) -> np.ndarray:
    """``n x G`` indicator matrix of an integer labeling."""
    labels = np.asarray(labels, dtype=np.intp)
    Z = np.zeros((labels.size, G), dtype=np.int8)
    Z[np.arange(labels.size), labels] = 1
    return Z


def as_labels(z) -> np.ndarray:
    """Integer labels from either an integer vector or a one-hot matrix."""
    z = np.asarray(z)
    if z.ndim == 2:
        if not np.all(z.sum(axis=1) == 1) or not np.all((z == 0) | (z == 1)):
            raise InvalidArgumentError("label matrix rows must be one-hot")
        return np.argmax(z, axis=1).astype(np.intp)
    if z.ndim != 1:
        raise InvalidArgumentError(f"labels must be 1-d or one-hot 2-d, got shape {z.shape}")
    out = z.astype(np.intp)
    if not np.array_equal(out, z):
        raise InvalidArgumentError("labels must be integers")
    return out


def canonical_labels(labels) -> np.ndarray:
    """Renumber components by order of first occurrence.

    Two labelings describe the same partition iff their canonical forms
    are equal.
    """
    labels = np.asarray(labels)
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first, kind="stable")
    mapping = np.empty(labels.max() + 1, dtype=np.intp)
    mapping[np.unique(labels)[order]] = np.arange(order.size)
    return mapping[labels]


# -- densities --------------------------------------------------------------

def _cholesky(cov: np.ndarray, component=None) -> np.ndarray:
    try:
        return linalg.cholesky(cov, lower=True, check_finite=False)
    except linalg.LinAlgError:
        raise FactorizationError(component) from None


def _log_density_rows(X: np.ndarray, mean: np.ndarray, chol: np.ndarray) -> np.ndarray:
    p = X.shape[1]
    dev = linalg.solve_triangular(chol, (X - mean).T, lower=True, check_finite=False)
    maha = np.einsum("ij,ij->j", dev, dev)
    logdet = 2.0 * np.log(np.diag(chol)).sum()
    return -0.5 * (p * LOG_2PI + logdet + maha)


def log_density(x, comp: ComponentParams, component=None) -> float:
    """Log of the multivariate Gaussian density at a single point ``x``.

    Uses the Cholesky factor of the covariance; the covariance is never
    inverted explicitly.

    Raises:
        FactorizationError: if the covariance is not positive definite.
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    mean = np.atleast_1d(np.asarray(comp.mean, dtype=np.float64))
    cov = np.atleast_2d(np.asarray(comp.covariance, dtype=np.float64))
    if not (x.shape == mean.shape and cov.shape == (x.size, x.size)):
        raise InvalidArgumentError(
            f"dimension mismatch: x {x.shape}, mean {mean.shape}, covariance {cov.shape}"
        )
    chol = _cholesky(cov, component)
    return float(_log_density_rows(x[None, :], mean, chol)[0])


def log_weighted_densities(data, params: MixtureParams) -> np.ndarray:
    """``n x G`` matrix of ``log pi_g + log phi(x_i | mu_g, Sigma_g)``."""
    X = as_matrix(data)
    out = np.empty((X.shape[0], params.G))
    for g, comp in enumerate(params.components):
        if comp.mean.shape != (X.shape[1],):
            raise InvalidArgumentError(f"component {g} mean has shape {comp.mean.shape}, expected ({X.shape[1]},)")
        chol = _cholesky(comp.covariance, g)
        with np.errstate(divide="ignore"):
            out[:, g] = math.log(comp.weight) if comp.weight > 0 else -np.inf
        out[:, g] += _log_density_rows(X, comp.mean, chol)
    return out


def mixture_log_likelihood(data, params: MixtureParams) -> float:
    """Observed-data log-likelihood ``sum_i log sum_g pi_g phi(x_i)``."""
    return float(logsumexp(log_weighted_densities(data, params), axis=1).sum())


# -- hard-label estimates and fitness ----------------------------------------

def check_covariance(cov: np.ndarray, component=None) -> None:
    """Raise unless ``cov`` is symmetric positive definite at the relative floor."""
    p = cov.shape[0]
    eig = np.linalg.eigvalsh(cov)
    floor = EIG_REL_TOL * np.trace(cov) / p
    if not (eig[0] > floor and floor > 0):
        raise InfeasibleLabelingError(
            component, f"has a singular covariance estimate (min eigenvalue {eig[0]:.3g})"
        )


def estimate_from_labels(data, labels, G: int | None = None, ridge: float = 0.0) -> MixtureParams:
    """Maximum-likelihood mixture parameters for a fixed hard labeling.

    Weights are group proportions, means are group averages and covariances
    use the biased ``1/n_g`` denominator. ``ridge`` adds ``ridge * I`` to
    every covariance (default 0, i.e. the exact estimates).

    Raises:
        InfeasibleLabelingError: if a component has ``n_g <= p`` members or a
            covariance fails the eigenvalue floor.
    """
    X = as_matrix(data)
    labels = as_labels(labels)
    n, p = X.shape
    if labels.shape[0] != n:
        raise InvalidArgumentError(f"{labels.shape[0]} labels for {n} observations")
    if G is None:
        G = int(labels.max()) + 1
    if labels.min() < 0 or labels.max() >= G:
        raise InvalidArgumentError(f"labels must lie in 0..{G - 1}")
    counts = np.bincount(labels, minlength=G)
    comps = []
    for g in range(G):
        n_g = counts[g]
        if n_g == 0:
            raise InfeasibleLabelingError(g, "is empty")
        if n_g <= p:
            raise InfeasibleLabelingError(g, f"has {n_g} members, needs at least {p + 1}")
        Xg = X[labels == g]
        mu = Xg.mean(axis=0)
        dev = Xg - mu
        cov = dev.T @ dev / n_g
        cov = 0.5 * (cov + cov.T)
        if ridge:
            cov = cov + ridge * np.eye(p)
        check_covariance(cov, g)
        comps.append(ComponentParams(n_g / n, mu, cov))
    return MixtureParams(tuple(comps))


def fitness(data, labels, G: int | None = None, ridge: float = 0.0) -> float:
    """Log-likelihood at the hard-label estimates; ``-inf`` if infeasible."""
    try:
        params = estimate_from_labels(data, labels, G, ridge)
        return mixture_log_likelihood(data, params)
    except (InfeasibleLabelingError, FactorizationError):
        return -math.inf


# -- EM ---------------------------------------------------------------------

def e_step(data, params: MixtureParams) -> np.ndarray:
    """Posterior membership probabilities, normalized in log space."""
    lw = log_weighted_densities(data, params)
    return np.exp(lw - logsumexp(lw, axis=1, keepdims=True))


def m_step(data, resp: np.ndarray, ridge: float = 0.0) -> MixtureParams:
    """Weighted analogue of :func:`estimate_from_labels`."""
    X = as_matrix(data)
    n, p = X.shape
    nk = resp.sum(axis=0)
    comps = []
    for g in range(resp.shape[1]):
        if not nk[g] > p * 1e-8 * n:
            raise DegeneracyError(f"component {g} weight collapsed to {nk[g] / n:.3g}")
        mu = resp[:, g] @ X / nk[g]
        dev = X - mu
        cov = (resp[:, g, None] * dev).T @ dev / nk[g]
        cov = 0.5 * (cov + cov.T)
        if ridge:
            cov = cov + ridge * np.eye(p)
        try:
            check_covariance(cov, g)
        except InfeasibleLabelingError as exc:
            raise DegeneracyError(f"component {g} covariance became singular") from exc
        comps.append(ComponentParams(nk[g] / n, mu, cov))
    return MixtureParams(tuple(comps))


def free_params(G: int, p: int) -> int:
    """Free parameter count of the unconstrained (VVV) Gaussian mixture."""
    return (G - 1) + G * p + G * p * (p + 1) // 2


class EMResult(NamedTuple):
    params: MixtureParams
    responsibilities: np.ndarray
    score: ModelScore
    history: List[float]
    converged: bool


def em_fit(data, G: int, init, tol: float = 1e-8, max_iter: int = 1000, ridge: float = 0.0) -> EMResult:
    """EM for the unconstrained Gaussian mixture, started from a hard labeling.

    Iterates until ``|l_t - l_{t-1}| / (1 + |l_{t-1}|) < tol`` or
    ``max_iter`` M-steps have run.

    Raises:
        InfeasibleLabelingError: the initial labeling is infeasible.
        DegeneracyError: a component collapsed; ``last_params`` holds the last
            valid iterate.
    """
    if tol <= 0:
        raise InvalidArgumentError("tol must be positive")
    X = as_matrix(data)
    params = estimate_from_labels(X, init, G, ridge)
    lw = log_weighted_densities(X, params)
    lse = logsumexp(lw, axis=1, keepdims=True)
    history = [float(lse.sum())]
    converged = False
    for it in range(1, max_iter + 1):
        resp = np.exp(lw - lse)
        try:
            new_params = m_step(X, resp, ridge)
            lw = log_weighted_densities(X, new_params)
        except (DegeneracyError, FactorizationError) as exc:
            raise DegeneracyError(str(exc), last_params=params, iteration=it) from exc
        params = new_params
        lse = logsumexp(lw, axis=1, keepdims=True)
        history.append(float(lse.sum()))
        if abs(history[-1] - history[-2]) / (1.0 + abs(history[-2])) < tol:
            converged = True
            break
    resp = np.exp(lw - lse)
    score = ModelScore(history[-1], free_params(G, X.shape[1]), X.shape[0])
    return EMResult(params, resp, score, history, converged)


def map_harden(resp) -> np.ndarray:
    """Row-wise argmax of a responsibility matrix; ties go to the lowest index."""
    resp = np.asarray(resp)
    return np.argmax(resp, axis=1).astype(np.intp)


def bic(log_likelihood: float, free_params: int, n_obs: int) -> float:
    """``2 l - rho ln n``; larger is better."""
    if n_obs < 1 or free_params < 1:
        raise InvalidArgumentError("bic needs n_obs >= 1 and free_params >= 1")
    return 2.0 * log_likelihood - free_params * math.log(n_obs)
