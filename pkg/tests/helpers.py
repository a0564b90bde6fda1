"""Shared oracles and generators for the test suite."""

from __future__ import annotations

import itertools

import numpy as np

from trilaman.geometry import collinearity, is_line_configuration
from trilaman.graph import TriangulatedLamanGraph, build_graph, edge_key, is_triangulated_laman
from trilaman.system import gradient, potential


def step_sequences(n: int):
    """Every vertex-add sequence on ``n`` vertices."""
    def grow(edges, steps, v):
        if v > n:
            yield list(steps)
            return
        for j, k in list(edges):
            yield from grow(edges + [(j, v), (k, v)], steps + [(v, j, k)], v + 1)
    yield from grow([(1, 2)], [], 3)


def _canonical(n, edges):
    best = None
    for perm in itertools.permutations(range(1, n + 1)):
        key = tuple(sorted(edge_key(perm[a - 1], perm[b - 1]) for a, b in edges))
        if best is None or key < best:
            best = key
    return best


def all_graphs(n: int) -> list[TriangulatedLamanGraph]:
    """Triangulated Laman graphs on ``n`` vertices, one per isomorphism class."""
    seen, out = set(), []
    for steps in step_sequences(n):
        g = build_graph(steps)
        key = _canonical(n, g.edges)
        if key not in seen:
            seen.add(key)
            out.append(g)
    return out


def line_degenerate_embedding(graph: TriangulatedLamanGraph, rng, p_align: float = 0.5,
                              all_aligned: bool = False) -> np.ndarray:
    """Random embedding in which each step triangle is exactly aligned with probability ``p_align``."""
    p = np.zeros((graph.vertex_count, 2))
    p[0] = rng.normal(size=2)
    ang = rng.uniform(0, 2 * np.pi)
    p[1] = p[0] + rng.uniform(0.5, 2.0) * np.array([np.cos(ang), np.sin(ang)])
    for s in graph.steps:
        j, k = s.parent_edge
        xj, xk = p[j - 1], p[k - 1]
        if all_aligned or rng.random() < p_align:
            while True:
                t = rng.uniform(-2.0, 3.0)
                if abs(t) > 0.2 and abs(t - 1) > 0.2:
                    break
            p[s.new_vertex - 1] = xj + t * (xk - xj)
        else:
            while True:
                cand = xj + rng.normal(size=2) * np.linalg.norm(xk - xj)
                if collinearity(xj, xk, cand) > 0.05 and min(np.linalg.norm(cand - xj),
                                                             np.linalg.norm(cand - xk)) > 0.1:
                    break
            p[s.new_vertex - 1] = cand
    return p


def brute_force_partitions(graph: TriangulatedLamanGraph, p, tol: float = 1e-7) -> list[frozenset]:
    """All partitions of the edge set into triangulated Laman line sub-frameworks."""
    edges = list(graph.edges)
    valid = []
    for r in range(1, len(edges) + 1):
        for subset in itertools.combinations(edges, r):
            verts = sorted({v for e in subset for v in e})
            if not is_triangulated_laman(verts, subset):
                continue
            if len(verts) > 2 and not is_line_configuration(p[np.asarray(verts) - 1], tol):
                continue
            valid.append(frozenset(subset))
    by_edge = {e: [b for b in valid if e in b] for e in edges}

    out = []

    def rec(remaining: frozenset, chosen: list):
        if not remaining:
            out.append(frozenset(chosen))
            return
        first = min(remaining)
        for b in by_edge[first]:
            if b <= remaining:
                rec(remaining - b, chosen + [b])

    rec(frozenset(edges), [])
    return out


def refines(fine: frozenset, coarse: frozenset) -> bool:
    return all(any(b <= c for c in coarse) for b in fine)


def fd_gradient(system, p, h=1e-6):
    flat = p.ravel().astype(float)
    g = np.zeros_like(flat)
    for i in range(flat.size):
        e = np.zeros_like(flat)
        e[i] = h
        g[i] = (potential(system, (flat + e).reshape(-1, 2))
                - potential(system, (flat - e).reshape(-1, 2))) / (2 * h)
    return g


def fd_hessian(system, p, h=1e-6):
    flat = p.ravel().astype(float)
    m = np.zeros((flat.size, flat.size))
    for i in range(flat.size):
        e = np.zeros_like(flat)
        e[i] = h
        m[:, i] = (gradient(system, (flat + e).reshape(-1, 2)).ravel()
                   - gradient(system, (flat - e).reshape(-1, 2)).ravel()) / (2 * h)
    return 0.5 * (m + m.T)


def separated_points(graph, rng, min_len=0.3, side=3.0):
    while True:
        p = rng.uniform(-side, side, size=(graph.vertex_count, 2))
        i, j = graph.edge_arrays()
        if np.min(np.linalg.norm(p[i] - p[j], axis=1)) > min_len:
            return p
