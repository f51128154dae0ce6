"""Group dependency graph: PageRank centrality and topological ordering.

Edges point from a group to the groups it depends on. PageRank therefore
flows importance toward widely-depended-on groups. Raw scores are a
probability distribution; the transformed scores used for ranking are
shifted natural logs, so the least central group sits exactly at 0.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .corpus import Corpus
from .errors import EmptyGraph, UnknownId
from .kernels import pagerank_power

DEFAULT_DAMPING = 0.85
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200


@dataclass
class DependencyGraph:
    nodes: list[int]
    forward: dict[int, list[int]] = field(default_factory=dict)
    reverse: dict[int, list[int]] = field(default_factory=dict)

    def __post_init__(self):
        node_set = set(self.nodes)
        for node in self.nodes:
            self.forward.setdefault(node, [])
        for src, dsts in self.forward.items():
            for endpoint in (src, *dsts):
                if endpoint not in node_set:
                    raise UnknownId(endpoint)
        if not any(self.reverse.values()):
            self.reverse = {}
            for src, dsts in self.forward.items():
                for dst in dsts:
                    self.reverse.setdefault(dst, []).append(src)
            for lst in self.reverse.values():
                lst.sort()
        for node in self.nodes:
            self.reverse.setdefault(node, [])


@dataclass
class PageRankScores:
    raw: dict[int, float]
    transformed: dict[int, float]
    damping: float
    iterations: int
    converged: bool


def build_group_graph(corpus: Corpus) -> DependencyGraph:
    """Build the dependency graph over all corpus groups."""
    forward = {g.id: list(g.dependency_ids) for g in corpus.groups}
    return DependencyGraph(nodes=[g.id for g in corpus.groups], forward=forward)


def dependencies(graph: DependencyGraph, group_id: int) -> list[int]:
    """Ids this group depends on, ascending."""
    if group_id not in graph.forward:
        raise UnknownId(group_id)
    return sorted(graph.forward[group_id])


def dependents(graph: DependencyGraph, group_id: int) -> list[int]:
    """Ids that depend on this group, ascending."""
    if group_id not in graph.reverse:
        raise UnknownId(group_id)
    return sorted(graph.reverse[group_id])


def pagerank(
    graph: DependencyGraph,
    damping: float = DEFAULT_DAMPING,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> PageRankScores:
    """Power-iteration PageRank over the forward edges.

    Dangling nodes spread their mass uniformly. Convergence is reached when
    the L1 change between sweeps drops to tol.
    """
    nodes = sorted(graph.nodes)
    if not nodes:
        raise EmptyGraph("pagerank needs at least one node")
    index = {node: i for i, node in enumerate(nodes)}
    edge_src = []
    edge_dst = []
    out_degree = np.zeros(len(nodes))
    for src in nodes:
        dsts = graph.forward.get(src, ())
        out_degree[index[src]] = len(dsts)
        for dst in dsts:
            edge_src.append(index[src])
            edge_dst.append(index[dst])
    ranks, iterations, converged = pagerank_power(
        np.asarray(edge_src, dtype=np.int64),
        np.asarray(edge_dst, dtype=np.int64),
        out_degree,
        len(nodes),
        damping,
        tol,
        max_iter,
    )
    raw = {node: float(ranks[index[node]]) for node in nodes}
    return PageRankScores(
        raw=raw,
        transformed=log_transform(raw),
        damping=damping,
        iterations=iterations,
        converged=converged,
    )


def log_transform(raw: Mapping[int, float]) -> dict[int, float]:
    """Shifted natural log: ln(score) - ln(min score). Minimum maps to 0.0."""
    if not raw:
        return {}
    log_min = math.log(min(raw.values()))
    return {node: math.log(score) - log_min for node, score in raw.items()}


def _tarjan_sccs(nodes: list[int], forward: Mapping[int, list[int]]) -> list[list[int]]:
    """Iterative Tarjan strongly-connected components."""
    index_of: dict[int, int] = {}
    lowlink: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    sccs: list[list[int]] = []
    counter = 0
    for root in nodes:
        if root in index_of:
            continue
        work = [(root, iter(forward.get(root, ())))]
        index_of[root] = lowlink[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, children = work[-1]
            advanced = False
            for child in children:
                if child not in index_of:
                    index_of[child] = lowlink[child] = counter
                    counter += 1
                    stack.append(child)
                    on_stack.add(child)
                    work.append((child, iter(forward.get(child, ()))))
                    advanced = True
                    break
                if child in on_stack:
                    lowlink[node] = min(lowlink[node], index_of[child])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
            if lowlink[node] == index_of[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                sccs.append(sorted(component))
    return sccs


def condensation_topo_order(graph: DependencyGraph) -> list[list[int]]:
    """Strongly-connected components in dependency-first order.

    Every component appears after all components it depends on. Ties are
    broken by the smallest member id; members inside a component are sorted
    ascending.
    """
    nodes = sorted(graph.nodes)
    sccs = _tarjan_sccs(nodes, graph.forward)
    scc_of = {node: i for i, scc in enumerate(sccs) for node in scc}
    # dep_edges[i] holds component indexes that i depends on
    dep_edges: list[set[int]] = [set() for _ in sccs]
    for src in nodes:
        for dst in graph.forward.get(src, ()):
            if scc_of[src] != scc_of[dst]:
                dep_edges[scc_of[src]].add(scc_of[dst])
    dependents_of: list[set[int]] = [set() for _ in sccs]
    remaining = [len(deps) for deps in dep_edges]
    for i, deps in enumerate(dep_edges):
        for dep in deps:
            dependents_of[dep].add(i)
    heap = [(sccs[i][0], i) for i in range(len(sccs)) if remaining[i] == 0]
    heapq.heapify(heap)
    order: list[list[int]] = []
    while heap:
        _, i = heapq.heappop(heap)
        order.append(sccs[i])
        for j in dependents_of[i]:
            remaining[j] -= 1
            if remaining[j] == 0:
                heapq.heappush(heap, (sccs[j][0], j))
    return order


def graph_payload(graph: DependencyGraph, scores: PageRankScores) -> dict:
    """JSON-ready form of the graph plus its PageRank scores."""
    return {
        "nodes": sorted(graph.nodes),
        "edges": sorted([src, dst] for src in graph.nodes for dst in graph.forward.get(src, ())),
        "pagerank_raw": {str(node): scores.raw[node] for node in sorted(scores.raw)},
        "pagerank_transformed": {str(node): scores.transformed[node] for node in sorted(scores.transformed)},
    }


def graph_from_payload(payload: Mapping) -> tuple[DependencyGraph, dict[int, float], dict[int, float]]:
    nodes = [int(n) for n in payload["nodes"]]
    forward: dict[int, list[int]] = {n: [] for n in nodes}
    for src, dst in payload["edges"]:
        forward[int(src)].append(int(dst))
    graph = DependencyGraph(nodes=nodes, forward=forward)
    raw = {int(k): float(v) for k, v in payload["pagerank_raw"].items()}
    transformed = {int(k): float(v) for k, v in payload["pagerank_transformed"].items()}
    return graph, raw, transformed
