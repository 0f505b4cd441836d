"""Compare the compiled and pure-Python fitness backends.

Usage: python benchmarks/bench_fitness.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from eaclust import kernels
from eaclust.data import load_fixture, sample_mixture, x2_like_spec
from eaclust.experiments import default_parents


def cases():
    wine = load_fixture("wine", standardize=True)
    yield "wine n=178 p=13 G=3", wine, default_parents(wine, 3, seed=1)[0], 3
    syn = sample_mixture(x2_like_spec(n=2000, seed=0))
    yield "x2-like n=2000 p=2 G=3", syn, np.asarray(syn.truth, dtype=np.intp), 3


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()
    print(f"backends available: {sorted(kernels.BACKENDS)}; default: {kernels.BACKEND}")
    for name, data, labels, G in cases():
        X = np.ascontiguousarray(data.observations)
        labels = np.ascontiguousarray(labels, dtype=np.intp)
        row = [name]
        ref = None
        for backend, fn in sorted(kernels.BACKENDS.items()):
            val = fn(X, labels, G)
            ref = val if ref is None else ref
            t = min(timeit.repeat(lambda: fn(X, labels, G), number=args.repeat, repeat=3)) / args.repeat
            row.append(f"{backend}: {t * 1e6:8.1f} us  (f={val:.10f}, rel diff {abs(val - ref) / abs(ref):.1e})")
        print("\n  ".join(row))


if __name__ == "__main__":
    main()
