"""Numeric kernels behind the vector index and PageRank.

Each kernel has a pure-numpy implementation and a numba-compiled one with
identical semantics. The compiled path is used when numba imports cleanly;
set DECLSEARCH_NO_NUMBA=1 to force the numpy path (useful for debugging and
for environments where JIT compilation is unwanted).
"""

from __future__ import annotations

import os

import numpy as np

_FORCE_NUMPY = os.environ.get("DECLSEARCH_NO_NUMBA", "").lower() in ("1", "true", "yes")


def _np_pairwise_sqdist(queries: np.ndarray, points: np.ndarray) -> np.ndarray:
    # ||q - p||^2 = ||q||^2 + ||p||^2 - 2 q.p, clipped against roundoff
    q2 = np.sum(queries * queries, axis=1)[:, None]
    p2 = np.sum(points * points, axis=1)[None, :]
    d2 = q2 + p2 - 2.0 * (queries @ points.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


def _np_pagerank_power(
    edge_src: np.ndarray,
    edge_dst: np.ndarray,
    out_degree: np.ndarray,
    n: int,
    damping: float,
    tol: float,
    max_iter: int,
) -> tuple[np.ndarray, int, bool]:
    ranks = np.full(n, 1.0 / n)
    dangling = out_degree == 0
    iterations = 0
    converged = False
    for _ in range(max_iter):
        iterations += 1
        contrib = np.zeros(n)
        if edge_src.size:
            np.add.at(contrib, edge_dst, ranks[edge_src] / out_degree[edge_src])
        dangling_mass = ranks[dangling].sum()
        new_ranks = (1.0 - damping) / n + damping * (contrib + dangling_mass / n)
        delta = np.abs(new_ranks - ranks).sum()
        ranks = new_ranks
        if delta <= tol:
            converged = True
            break
    return ranks, iterations, converged


if not _FORCE_NUMPY:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        _FORCE_NUMPY = True

if not _FORCE_NUMPY:

    @njit(cache=True)
    def _nb_pairwise_sqdist(queries, points):
        nq, dim = queries.shape
        npts = points.shape[0]
        out = np.empty((nq, npts))
        for i in range(nq):
            for j in range(npts):
                acc = 0.0
                for k in range(dim):
                    diff = queries[i, k] - points[j, k]
                    acc += diff * diff
                out[i, j] = acc
        return out

    @njit(cache=True)
    def _nb_pagerank_power(edge_src, edge_dst, out_degree, n, damping, tol, max_iter):
        ranks = np.full(n, 1.0 / n)
        iterations = 0
        converged = False
        for _ in range(max_iter):
            iterations += 1
            contrib = np.zeros(n)
            for e in range(edge_src.shape[0]):
                contrib[edge_dst[e]] += ranks[edge_src[e]] / out_degree[edge_src[e]]
            dangling_mass = 0.0
            for v in range(n):
                if out_degree[v] == 0:
                    dangling_mass += ranks[v]
            delta = 0.0
            for v in range(n):
                new_rank = (1.0 - damping) / n + damping * (contrib[v] + dangling_mass / n)
                delta += abs(new_rank - ranks[v])
                contrib[v] = new_rank
            for v in range(n):
                ranks[v] = contrib[v]
            if delta <= tol:
                converged = True
                break
        return ranks, iterations, converged

    pairwise_sqdist = _nb_pairwise_sqdist
    pagerank_power = _nb_pagerank_power
    USING_NUMBA = True
else:
    pairwise_sqdist = _np_pairwise_sqdist
    pagerank_power = _np_pagerank_power
    USING_NUMBA = False


def warmup() -> None:
    """Trigger JIT compilation so later calls run at full speed."""
    pts = np.eye(3)
    pairwise_sqdist(pts[:1], pts)
    pagerank_power(
        np.array([0, 1], dtype=np.int64),
        np.array([1, 0], dtype=np.int64),
        np.array([1, 1, 0], dtype=np.float64),
        3,
        0.85,
        1e-10,
        5,
    )
