"""Compare the compiled and pure-numpy kernel paths.

Run from the repository root:

    python3 benchmarks/bench_kernels.py
    DECLSEARCH_NO_NUMBA=1 python3 benchmarks/bench_kernels.py   # numpy only

The compiled path is timed after a warmup call so JIT compilation is not
counted.
"""

import argparse
import time

import numpy as np

from declsearch import kernels


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_sqdist(rng, n_queries, n_points, dim, repeats):
    # Search embeds one query at a time, so n_queries=1 is the shape that matters.
    points = rng.standard_normal((n_points, dim))
    queries = rng.standard_normal((n_queries, dim))
    rows = []
    baseline = timeit(lambda: kernels._np_pairwise_sqdist(queries, points), repeats)
    rows.append(("numpy", baseline))
    if kernels.USING_NUMBA:
        kernels.pairwise_sqdist(queries[:1], points[:2])
        compiled = timeit(lambda: kernels.pairwise_sqdist(queries, points), repeats)
        rows.append(("numba", compiled))
        got = kernels.pairwise_sqdist(queries, points)
        want = kernels._np_pairwise_sqdist(queries, points)
        assert np.allclose(got, want, atol=1e-8), "kernel outputs disagree"
    return f"pairwise sqdist {n_queries}x{n_points} dim={dim}", rows


def bench_pagerank(rng, n_nodes, n_edges, repeats):
    edge_src = rng.integers(0, n_nodes, n_edges).astype(np.int64)
    edge_dst = rng.integers(0, n_nodes, n_edges).astype(np.int64)
    out_degree = np.zeros(n_nodes)
    np.add.at(out_degree, edge_src, 1.0)
    args = (edge_src, edge_dst, out_degree, n_nodes, 0.85, 1e-10, 100)
    rows = []
    baseline = timeit(lambda: kernels._np_pagerank_power(*args), repeats)
    rows.append(("numpy", baseline))
    if kernels.USING_NUMBA:
        kernels.warmup()
        compiled = timeit(lambda: kernels.pagerank_power(*args), repeats)
        rows.append(("numba", compiled))
        got, _, _ = kernels.pagerank_power(*args)
        want, _, _ = kernels._np_pagerank_power(*args)
        assert np.allclose(got, want, atol=1e-12), "kernel outputs disagree"
    return f"pagerank {n_nodes} nodes, {n_edges} edges", rows


def report(label, rows):
    print(label)
    baseline = rows[0][1]
    for name, seconds in rows:
        ratio = baseline / seconds if seconds else float("inf")
        print(f"  {name:<8}{seconds * 1e3:>10.2f} ms   x{ratio:.2f}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--queries", type=int, default=1)
    parser.add_argument("--points", type=int, default=50_000)
    parser.add_argument("--dim", type=int, default=256)
    parser.add_argument("--nodes", type=int, default=100_000)
    parser.add_argument("--edges", type=int, default=800_000)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    print(f"compiled path available: {kernels.USING_NUMBA}")
    rng = np.random.default_rng(args.seed)
    report(*bench_sqdist(rng, args.queries, args.points, args.dim, args.repeats))
    report(*bench_pagerank(rng, args.nodes, args.edges, args.repeats))


if __name__ == "__main__":
    main()
