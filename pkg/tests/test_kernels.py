import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eaclust import kernels, mixture

needs_compiled = pytest.mark.skipif("compiled" not in kernels.BACKENDS, reason="compiled extension not built")


@needs_compiled
@given(st.integers(0, 2**32 - 1), st.integers(2, 4), st.integers(1, 5))
@settings(max_examples=60)
def test_backends_agree(seed, G, p):
    rng = np.random.default_rng(seed)
    n = G * (p + 3)
    X = np.ascontiguousarray(rng.normal(size=(n, p)) * rng.uniform(0.1, 10, size=p))
    labels = rng.integers(G, size=n).astype(np.intp)
    a = kernels.python_labelled_fitness(X, labels, G)
    b = kernels.compiled_labelled_fitness(X, labels, G)
    ref = mixture.fitness(X, labels, G)
    if math.isinf(ref):
        assert a == b == -math.inf
    else:
        assert a == pytest.approx(ref, rel=1e-11)
        assert b == pytest.approx(ref, rel=1e-11)


@needs_compiled
def test_compiled_rejects_bad_labels():
    X = np.zeros((4, 1))
    with pytest.raises(ValueError):
        kernels.compiled_labelled_fitness(X, np.array([0, 1, 2, 0], np.intp), 2)


def test_python_rejects_bad_labels():
    with pytest.raises(ValueError):
        kernels.python_labelled_fitness(np.zeros((4, 1)), np.array([0, 1, 2, 0], np.intp), 2)


def test_ridge_matches_mixture():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(12, 2))
    labels = np.repeat([0, 1], 6).astype(np.intp)
    for impl in kernels.BACKENDS.values():
        assert impl(X, labels, 2, 0.5) == pytest.approx(mixture.fitness(X, labels, 2, ridge=0.5), rel=1e-12)


def test_backend_env(monkeypatch):
    monkeypatch.setenv("EACLUST_BACKEND", "python")
    assert kernels._select_backend()[0] == "python"
    monkeypatch.setenv("EACLUST_BACKEND", "bogus")
    with pytest.raises(ValueError):
        kernels._select_backend()
