#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallbacks.

Times the four hot kernels on realistic workloads (normalized titles,
TF count vectors, forest training/evaluation shapes) and checks that both
backends return identical results. Run from the repo root:

    python bench/bench_kernels.py

Set ARXMATCH_NO_NUMBA=1 to see how the package behaves with the fallback
selected at import time (this script always benchmarks both directly).
"""

from __future__ import annotations

import time

import numpy as np

import arxmatch._kernels as K
from arxmatch.normalize import normalize_text
from arxmatch.synth import _make_abstract, _make_title  # noqa: PLC2701

REPEAT = 3


def timeit(fn, *args, number=1):
    best = float("inf")
    result = None
    for _ in range(REPEAT):
        t0 = time.perf_counter()
        for _ in range(number):
            result = fn(*args)
        best = min(best, (time.perf_counter() - t0) / number)
    return best, result


def bench_pair(name, fn_nb, fn_np, workload, check=lambda a, b: a == b):
    t_np, r_np = timeit(lambda: workload(fn_np))
    if fn_nb is None:
        print(f"{name:<22} numpy {t_np * 1e3:9.2f} ms   (numba unavailable)")
        return
    workload(fn_nb)  # warm the JIT outside the timed region
    t_nb, r_nb = timeit(lambda: workload(fn_nb))
    assert check(r_nb, r_np), f"{name}: backends disagree"
    print(f"{name:<22} numba {t_nb * 1e3:9.2f} ms   numpy {t_np * 1e3:9.2f} ms"
          f"   speedup {t_np / t_nb:6.1f}x   agree")


def main() -> None:
    print(f"selected backend at import: {K.BACKEND}")
    has_numba = hasattr(K, "levenshtein_nb")
    rng = np.random.default_rng(0)

    titles = [normalize_text(_make_title(rng)).value for _ in range(400)]
    codes = [K.str_to_codes(t) for t in titles]

    def lev_workload(fn):
        total = 0
        for i in range(len(codes)):
            total += fn(codes[i], codes[(i * 7 + 1) % len(codes)])
        return total

    abstracts = [normalize_text(_make_abstract(rng)).value.split()
                 for _ in range(400)]
    vecs = []
    vocab: dict[str, int] = {}
    for toks in abstracts:
        counts: dict[int, int] = {}
        for t in toks:
            tid = vocab.setdefault(t, len(vocab))
            counts[tid] = counts.get(tid, 0) + 1
        ids = np.array(sorted(counts), dtype=np.int64)
        vecs.append((ids, np.array([counts[i] for i in ids], dtype=np.int64)))

    def dot_workload(fn):
        total = 0
        for i in range(len(vecs)):
            a, b = vecs[i], vecs[(i * 13 + 1) % len(vecs)]
            total += fn(a[0], a[1], b[0], b[1])
        return total

    x = rng.random((2000, 3))
    labels = rng.integers(0, 2, 2000).astype(bool)
    w = np.ones(2000)
    pos_w = np.where(labels, w, 0.0)
    neg_w = np.where(labels, 0.0, w)
    feats = np.array([0, 1, 2], dtype=np.int64)

    def split_workload(fn):
        out = []
        for _ in range(30):
            out.append(fn(x, pos_w, neg_w, feats))
        return tuple(map(float, out[-1]))

    depth = 6
    nodes_per_tree = 2 ** (depth + 1) - 1
    n_trees = 100
    feat = np.full(n_trees * nodes_per_tree, -1, dtype=np.int64)
    thr = np.zeros_like(feat, dtype=np.float64)
    left = np.full_like(feat, -1)
    right = np.full_like(feat, -1)
    prob = rng.random(feat.size)
    roots = np.arange(n_trees, dtype=np.int64) * nodes_per_tree
    for base in roots:
        for lvl in range(depth):
            start = base + 2 ** lvl - 1
            for i in range(start, base + 2 ** (lvl + 1) - 1):
                feat[i] = (i - base) % 3
                thr[i] = rng.random()
                left[i] = 2 * (i - base) + 1 + base
                right[i] = 2 * (i - base) + 2 + base
    queries = rng.random((20_000, 3))

    def forest_workload(fn):
        return fn(feat, thr, left, right, prob, roots, queries)

    print(f"\nworkloads: {len(codes)} title pairs, {len(vecs)} TF dot products,"
          f" 30 split searches over 2,000 rows, 20,000 forest queries x "
          f"{n_trees} trees\n")
    bench_pair("levenshtein", K.levenshtein_nb if has_numba else None,
               K.levenshtein_np, lev_workload)
    bench_pair("sorted_dot", K.sorted_dot_nb if has_numba else None,
               K.sorted_dot_np, dot_workload)
    bench_pair("best_split", K.best_split_nb if has_numba else None,
               K.best_split_np, split_workload)
    bench_pair("forest_eval", K.forest_eval_nb if has_numba else None,
               K.forest_eval_np, forest_workload,
               check=lambda a, b: np.array_equal(a, b))


if __name__ == "__main__":
    main()
