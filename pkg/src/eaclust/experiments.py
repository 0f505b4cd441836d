"""Method runners shared by the CLI and the reproduction scripts."""
from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import baselines, metrics, mixture
from .dataset import Dataset
from .errors import EAClustError, InfeasibleLabelingError, InvalidArgumentError
from .evolution import EAConfig, evolve

REPORT_VERSION = 1
METHODS = ("ea", "em", "kmeans", "kmedoids", "cem")


@dataclass
class RunReport:
    method: str
    config: Dict[str, Any]
    final_labels: List[int]
    log_likelihood: Optional[float]
    bic: Optional[float]
    free_params: int
    seed: int
    wall_time_ms: int = 0
    confusion: Optional[dict] = None
    rand: Optional[float] = None
    ari: Optional[float] = None
    misclassified: Optional[int] = None
    generations: Optional[int] = None
    error: Optional[dict] = None
    version: int = REPORT_VERSION

    def to_dict(self) -> dict:
        d = asdict(self)
        # the error field is present only on failure
        if d["error"] is None:
            del d["error"]
        return d

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True, allow_nan=False)

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        return cls(**d)

    @classmethod
    def from_json(cls, s: str) -> "RunReport":
        return cls.from_dict(json.loads(s))


def default_parents(data: Dataset, G: int, seed: int, restarts: int = 25, parents: int = 2) -> List[np.ndarray]:
    """Initial EA parents: a k-means and a k-medoids labeling.

    Parents beyond the second come from single-start k-means runs on their
    own spawned streams.
    """
    rng = np.random.default_rng(seed)
    out = [baselines.kmeans(data, G, rng, restarts=restarts).labels, baselines.kmedoids(data, G).labels]
    for sub in np.random.default_rng([seed, 1]).spawn(max(parents - 2, 0)):
        out.append(baselines.kmeans(data, G, sub, restarts=1).labels)
    return out[:parents]


def _finite_or_none(x):
    return float(x) if x is not None and math.isfinite(x) else None


def run_method(method: str, data: Dataset, G: int, *, seed: int = 0, parents: int = 2, clones: int = 10,
               stagnation: int = 3, restarts: int = 25, tol: float = 1e-8, max_iter: int = 1000,
               ridge: float = 0.0, threads: int = 1, max_generations: int = 10_000,
               init_parents: Optional[Sequence[np.ndarray]] = None) -> RunReport:
    """Fit one method and package the outcome.

    EA parents default to :func:`default_parents`; EM starts from the
    k-means labeling.
    """
    if method not in METHODS:
        raise InvalidArgumentError(f"unknown method {method!r}; choose from {METHODS}")
    config = {"G": G}
    t0 = time.perf_counter()
    generations = None
    if method == "ea":
        config.update(parents=parents, clones=clones, stagnation=stagnation, ridge=ridge,
                      restarts=restarts, max_generations=max_generations)
        if init_parents is None:
            init_parents = default_parents(data, G, seed, restarts, parents)
        res = evolve(data, EAConfig(G, parents, clones, stagnation, seed, max_generations, ridge, threads),
                     init_parents)
        labels, loglik, generations = res.best.labels, res.best.fitness, res.generations
    elif method == "em":
        config.update(tol=tol, max_iter=max_iter, ridge=ridge, restarts=restarts)
        init = baselines.kmeans(data, G, np.random.default_rng(seed), restarts=restarts).labels
        em = mixture.em_fit(data, G, init, tol, max_iter, ridge)
        labels, loglik = mixture.map_harden(em.responsibilities), em.score.log_likelihood
        generations = len(em.history) - 1
    elif method == "kmeans":
        config.update(restarts=restarts)
        labels = baselines.kmeans(data, G, np.random.default_rng(seed), restarts=restarts).labels
        loglik = mixture.fitness(data, labels, G, ridge)
    elif method == "kmedoids":
        labels = baselines.kmedoids(data, G).labels
        loglik = mixture.fitness(data, labels, G, ridge)
    else:
        config.update(restarts=restarts)
        init = baselines.kmeans(data, G, np.random.default_rng(seed), restarts=restarts).labels
        labels = baselines.cem_spherical(data, G, init, max_iter)
        loglik = mixture.fitness(data, labels, G, ridge)
    wall = int(round((time.perf_counter() - t0) * 1000))

    rho = mixture.free_params(G, data.p)
    loglik = _finite_or_none(loglik)
    report = RunReport(
        method=method,
        config=config,
        final_labels=[int(v) for v in labels],
        log_likelihood=loglik,
        bic=None if loglik is None else mixture.bic(loglik, rho, data.n),
        free_params=rho,
        seed=seed,
        wall_time_ms=wall,
        generations=generations,
    )
    if data.truth is not None:
        attach_truth(report, data.truth)
    return report


def attach_truth(report: RunReport, truth) -> RunReport:
    s = metrics.summary(np.asarray(truth).astype(str), np.asarray(report.final_labels))
    report.confusion = s["confusion"]
    report.rand = s["rand"]
    report.ari = s["ari"]
    report.misclassified = s["misclassified"]
    return report


@dataclass
class SweepRow:
    G: int
    log_likelihood: Optional[float] = None
    free_params: Optional[int] = None
    bic: Optional[float] = None
    best: bool = False
    error: Optional[str] = None


def bic_sweep(data: Dataset, g_min: int, g_max: int, method: str = "em", **kwargs) -> List[SweepRow]:
    """Fit every ``G`` in ``g_min..g_max``; rows sorted by BIC, best first.

    A failure for one ``G`` is recorded in its row and the sweep continues.
    """
    if not 1 <= g_min <= g_max:
        raise InvalidArgumentError("need 1 <= g_min <= g_max")
    if method not in ("ea", "em"):
        raise InvalidArgumentError("bic sweeps support 'ea' and 'em'")
    rows = []
    for G in range(g_min, g_max + 1):
        try:
            if G == 1:
                # a single component has exactly one labeling
                labels = np.zeros(data.n, dtype=np.intp)
                params = mixture.estimate_from_labels(data, labels, 1, kwargs.get("ridge", 0.0))
                ll = mixture.mixture_log_likelihood(data, params)
            else:
                ll = run_method(method, data, G, **kwargs).log_likelihood
                if ll is None:
                    raise InfeasibleLabelingError(None, "produced no finite log-likelihood")
            rho = mixture.free_params(G, data.p)
            rows.append(SweepRow(G, ll, rho, mixture.bic(ll, rho, data.n)))
        except (EAClustError, ValueError) as exc:
            rows.append(SweepRow(G, error=f"{type(exc).__name__}: {exc}"))
    ok = [r for r in rows if r.bic is not None]
    ok.sort(key=lambda r: -r.bic)
    if ok:
        ok[0].best = True
    return ok + [r for r in rows if r.bic is None]


def reproduce_grid(data: Dataset, G: int, stagnations=(3, 4, 5), clones=(10, 20, 30, 40), seed: int = 1,
                   restarts: int = 25, threads: int = 1) -> List[RunReport]:
    """EA runs over the stagnation x clones grid with shared k-means/k-medoids parents."""
    init = default_parents(data, G, seed, restarts)
    reports = []
    for st, cl in itertools.product(stagnations, clones):
        reports.append(run_method("ea", data, G, seed=seed, clones=cl, stagnation=st, restarts=restarts,
                                  threads=threads, init_parents=init))
    return reports


def run_report_row(report: RunReport) -> dict:
    """Compact summary of a report for grid and comparison tables."""
    cfg = report.config
    return {
        "method": report.method,
        "stagnation": cfg.get("stagnation"),
        "clones": cfg.get("clones"),
        "log_likelihood": report.log_likelihood,
        "ari": report.ari,
        "misclassified": report.misclassified,
        "generations": report.generations,
    }
