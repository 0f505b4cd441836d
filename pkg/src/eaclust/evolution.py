"""Evolutionary search over hard labelings.

Each generation clones every parent, applies one label-swap crossover per
clone, keeps the fittest ``parents`` candidates, then gives every parent one
greedy first-improvement mutation. The run ends once the stagnation counter
reaches its limit.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from . import kernels
from .dataset import as_matrix
from .errors import InfeasibleLabelingError, InvalidArgumentError, NoDistinctPairError
from .mixture import as_labels, canonical_labels, estimate_from_labels


@dataclass
class Candidate:
    labels: np.ndarray
    fitness: float

    def key(self) -> bytes:
        """Permutation-invariant identity of the partition."""
        return canonical_labels(self.labels).tobytes()


@dataclass(frozen=True)
class EAConfig:
    G: int
    parents: int = 2
    clones: int = 10
    stagnation: int = 3
    seed: int = 0
    max_generations: int = 10_000
    ridge: float = 0.0
    threads: int = 1

    def __post_init__(self):
        if self.G < 2:
            raise InvalidArgumentError("the EA needs G >= 2")
        for name in ("parents", "clones", "stagnation", "max_generations", "threads"):
            if getattr(self, name) < 1:
                raise InvalidArgumentError(f"{name} must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise InvalidArgumentError("seed must be an unsigned 64-bit integer")


@dataclass
class GenerationLog:
    generation: int
    best_fitness: float
    stag_counter: int
    swaps_attempted: int
    mutations_accepted: int


@dataclass
class EAResult:
    best: Candidate
    parents: List[Candidate]
    log: List[GenerationLog] = field(default_factory=list)

    @property
    def generations(self) -> int:
        return len(self.log)


class FitnessEvaluator:
    """Binds a data matrix, ``G`` and ridge to the active fitness kernel."""

    def __init__(self, data, G: int, ridge: float = 0.0, backend: Optional[str] = None):
        self.X = np.ascontiguousarray(as_matrix(data), dtype=np.float64)
        self.G = G
        self.ridge = ridge
        self._impl = kernels.BACKENDS[backend] if backend else kernels.labelled_fitness

    def __call__(self, labels: np.ndarray) -> float:
        return self._impl(self.X, labels, self.G, self.ridge)


def _pick_pair(labels: np.ndarray, rng: np.random.Generator):
    if np.all(labels == labels[0]):
        raise NoDistinctPairError("all observations carry the same label")
    n = labels.shape[0]
    while True:
        i, j = rng.integers(n, size=2)
        if labels[i] != labels[j]:
            return int(i), int(j)


def swap_labels(labels: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Copy of ``labels`` with the labels of two differently-labeled observations exchanged."""
    i, j = _pick_pair(labels, rng)
    child = labels.copy()
    child[i], child[j] = labels[j], labels[i]
    return child


def crossover_swap(parent: Candidate, rng: np.random.Generator, evaluate: FitnessEvaluator) -> Candidate:
    """One crossover child of ``parent`` with its fitness cached.

    Raises:
        NoDistinctPairError: if every observation has the same label.
    """
    child = swap_labels(parent.labels, rng)
    return Candidate(child, evaluate(child))


def mutate_greedy(parent: Candidate, rng: np.random.Generator, evaluate: FitnessEvaluator):
    """First-improvement single-observation reassignment.

    Observations are visited in random order; each is moved to one other
    component (drawn uniformly from the ``G - 1`` alternatives). The first
    move that strictly raises fitness is kept.

    Returns:
        ``(candidate, accepted)``; the parent itself when nothing improved.
    """
    G = evaluate.G
    labels = parent.labels.copy()
    for i in rng.permutation(labels.shape[0]):
        old = labels[i]
        if G == 2:
            new = 1 - old
        else:
            new = int(rng.integers(G - 1))
            new += new >= old
        labels[i] = new
        f = evaluate(labels)
        if f > parent.fitness:
            return Candidate(labels, f), True
        labels[i] = old
    return parent, False


def _top_keys(cands: Sequence[Candidate]):
    return sorted(c.key() for c in cands)


def evolve(data, config: EAConfig, init_parents: Sequence, backend: Optional[str] = None) -> EAResult:
    """Run the evolutionary algorithm from ``init_parents``.

    Args:
        data: Dataset or ``n x p`` matrix.
        config: run settings; ``config.parents`` must equal ``len(init_parents)``.
        init_parents: feasible labelings (integer vectors or one-hot matrices).
        backend: force ``"python"`` or ``"compiled"`` fitness; default is the
            import-time selection.

    Raises:
        InfeasibleLabelingError: an initial parent is infeasible.
    """
    X = as_matrix(data)
    if len(init_parents) != config.parents:
        raise InvalidArgumentError(f"expected {config.parents} initial parents, got {len(init_parents)}")
    evaluate = FitnessEvaluator(X, config.G, config.ridge, backend)
    rng = np.random.default_rng(config.seed)

    parents = []
    for z in init_parents:
        labels = as_labels(z)
        if labels.shape[0] != X.shape[0]:
            raise InvalidArgumentError(f"initial labeling has {labels.shape[0]} entries, data has {X.shape[0]}")
        f = evaluate(labels)
        if not math.isfinite(f):
            # surface the specific reason
            estimate_from_labels(X, labels, config.G, config.ridge)
            raise InfeasibleLabelingError(None, "yields no finite fitness")
        parents.append(Candidate(labels, f))

    pool_exec = ThreadPoolExecutor(config.threads) if config.threads > 1 else None
    log: List[GenerationLog] = []
    prev_top = _top_keys(parents)
    best_so_far = max(c.fitness for c in parents)
    stag = 0
    gen = 0
    try:
        while stag < config.stagnation and gen < config.max_generations:
            gen += 1
            # crossover: all draws happen serially, then fitness may run in parallel
            child_labels = []
            for parent in parents:
                for _ in range(config.clones):
                    try:
                        child_labels.append(swap_labels(parent.labels, rng))
                    except NoDistinctPairError:
                        break
            if pool_exec is not None:
                fits = list(pool_exec.map(evaluate, child_labels))
            else:
                fits = [evaluate(z) for z in child_labels]
            children = [Candidate(z, f) for z, f in zip(child_labels, fits)]

            # stable sort: incumbents ahead of children on ties, then creation order
            pool = parents + children
            order = sorted(range(len(pool)), key=lambda k: -pool[k].fitness)
            parents = [pool[k] for k in order[: config.parents]]
            top = _top_keys(parents)
            stag = stag + 1 if top == prev_top else 0
            prev_top = top

            accepted = 0
            for a in range(len(parents)):
                parents[a], ok = mutate_greedy(parents[a], rng, evaluate)
                accepted += ok
            if accepted == 0:
                stag += 1
            else:
                parents.sort(key=lambda c: -c.fitness)

            best = max(c.fitness for c in parents)
            assert best >= best_so_far, "best fitness decreased"
            best_so_far = best
            log.append(GenerationLog(gen, best, stag, len(child_labels), accepted))
    finally:
        if pool_exec is not None:
            pool_exec.shutdown()

    best = max(parents, key=lambda c: c.fitness)
    return EAResult(best, parents, log)
