#!/usr/bin/env python3
"""Benchmark the EM expectation pass: compiled kernel vs numpy fallback.

Usage: python3 benchmarks/bench_align.py [--pairs 2000] [--iterations 5]

Both backends run on the same flattened corpus layout; the script asserts
their per-iteration log-likelihoods agree to 1e-9 before reporting timings.
"""

import argparse
import random
import time

import numpy as np

from genderlens.align import ParallelCorpus
from genderlens.align import _em_py
from genderlens.align.em import _build_layout, _build_support

try:
    from genderlens.align import _em_cy
except ImportError:
    _em_cy = None


def synthetic_corpus(n_pairs, seed=11):
    rng = random.Random(seed)
    # Zipf-ish vocabulary: low ids much more frequent, like natural text
    ranks = np.arange(1, 801)
    weights = (1.0 / ranks).tolist()
    pairs = []
    for _ in range(n_pairs):
        length = rng.randint(6, 18)
        src = [f"w{i}" for i in rng.choices(range(len(ranks)), weights, k=length)]
        tgt = [
            w + "_t" if rng.random() > 0.15 else f"w{rng.randrange(800)}_t"
            for w in src
        ]
        pairs.append((src, tgt))
    return pairs


def run_backend(kernel, theta0, layout, iterations, row_of_k, n_rows):
    kflat, dflat, offsets, rows, cols = layout
    theta = theta0.copy()
    logliks = []
    started = time.perf_counter()
    for _ in range(iterations):
        counts = np.zeros_like(theta)
        logliks.append(kernel.em_pass(theta, kflat, dflat, offsets, rows,
                                      cols, counts))
        counts += 1e-12
        row_sums = np.bincount(row_of_k, weights=counts, minlength=n_rows)
        theta = counts / row_sums[row_of_k]
    return time.perf_counter() - started, logliks


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pairs", type=int, default=2000)
    parser.add_argument("--iterations", type=int, default=5)
    args = parser.parse_args()

    corpus = ParallelCorpus(synthetic_corpus(args.pairs))
    row_ptr, col_tgt = _build_support(corpus)
    layout = _build_layout(corpus, row_ptr, col_tgt, 4.0, 0.08)
    row_lengths = np.diff(row_ptr)
    row_of_k = np.repeat(np.arange(len(row_lengths)), row_lengths)
    theta0 = (1.0 / row_lengths)[row_of_k]

    backends = [("python (numpy)", _em_py)]
    if _em_cy is not None:
        backends.append(("cython", _em_cy))

    print(f"corpus: {args.pairs} pairs, {len(theta0)} translation-table "
          f"entries, {args.iterations} EM iterations")
    results = {}
    for name, kernel in backends:
        elapsed, logliks = run_backend(kernel, theta0, layout, args.iterations,
                                       row_of_k, len(row_lengths))
        results[name] = (elapsed, logliks)
        per_iter = elapsed / args.iterations
        print(f"  {name:16s} {elapsed:7.3f}s total  {per_iter:7.3f}s/iter  "
              f"final loglik {logliks[-1]:.4f}")

    if _em_cy is not None:
        py_ll = results["python (numpy)"][1]
        cy_ll = results["cython"][1]
        worst = max(abs(a - b) for a, b in zip(py_ll, cy_ll))
        assert worst < 1e-9, f"backends disagree by {worst}"
        speedup = results["python (numpy)"][0] / results["cython"][0]
        print(f"  backends agree to {worst:.2e}; cython speedup {speedup:.2f}x")
    else:
        print("  compiled kernel not built; numpy fallback only")


if __name__ == "__main__":
    main()
