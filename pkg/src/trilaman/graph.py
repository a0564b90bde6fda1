"""Triangulated Laman graphs and their vertex-add construction sequences.

Vertices are labeled ``1..N`` in the order they appear in the construction:
the base edge is ``(1, 2)`` and step ``v`` attaches vertex ``v`` to both
endpoints of an existing edge.  Edges are stored as sorted tuples ``(i, j)``
with ``i < j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

Edge = tuple[int, int]


class HennebergError(ValueError):
    """A construction step is malformed; ``position`` is 1-based when known."""

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message)
        self.position = position


class TargetError(ValueError):
    """Target distances are missing or not positive."""


def edge_key(i: int, j: int) -> Edge:
    if i == j:
        raise ValueError(f"self-loop at vertex {i}")
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class HennebergStep:
    new_vertex: int
    parent_edge: Edge

    def __post_init__(self):
        j, k = self.parent_edge
        object.__setattr__(self, "parent_edge", edge_key(int(j), int(k)))
        object.__setattr__(self, "new_vertex", int(self.new_vertex))


@dataclass(frozen=True)
class TriangulatedLamanGraph:
    vertex_count: int
    edges: tuple[Edge, ...]
    steps: tuple[HennebergStep, ...] = field(default=())

    @property
    def vertices(self) -> range:
        return range(1, self.vertex_count + 1)

    @property
    def edge_index(self) -> dict[Edge, int]:
        return {e: n for n, e in enumerate(self.edges)}

    def neighbors(self, v: int) -> list[int]:
        out = []
        for i, j in self.edges:
            if i == v:
                out.append(j)
            elif j == v:
                out.append(i)
        return sorted(out)

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Zero-based endpoint index arrays, in edge order."""
        e = np.asarray(self.edges, dtype=int).reshape(-1, 2)
        return e[:, 0] - 1, e[:, 1] - 1

    def prefix(self, n_steps: int) -> "TriangulatedLamanGraph":
        """The graph built from the base edge and the first ``n_steps`` steps."""
        return build_graph(self.steps[:n_steps])

    def to_spec(self) -> list[tuple[int, int, int]]:
        return [(s.new_vertex, *s.parent_edge) for s in self.steps]


def build_graph(steps: Iterable[HennebergStep | Sequence]) -> TriangulatedLamanGraph:
    """Build the graph obtained by applying vertex-add steps to the edge (1, 2).

    ``steps`` may hold :class:`HennebergStep` objects or ``(v, (j, k))`` /
    ``(v, j, k)`` tuples.
    """
    parsed = [_coerce_step(s) for s in steps]
    edges = {(1, 2)}
    n = 2
    for pos, step in enumerate(parsed, start=1):
        v = step.new_vertex
        j, k = step.parent_edge
        if v != n + 1:
            raise HennebergError(
                f"step {pos} ({v}, {step.parent_edge}): expected new vertex {n + 1}", pos
            )
        if step.parent_edge not in edges:
            raise HennebergError(
                f"step {pos} ({v}, {step.parent_edge}): parent edge not in graph", pos
            )
        edges.add(edge_key(j, v))
        edges.add(edge_key(k, v))
        n = v
    return TriangulatedLamanGraph(n, tuple(sorted(edges)), tuple(parsed))


def _coerce_step(s) -> HennebergStep:
    if isinstance(s, HennebergStep):
        return s
    if len(s) == 2:
        v, (j, k) = s
    elif len(s) == 3:
        v, j, k = s
    else:
        raise HennebergError(f"cannot interpret step {s!r}")
    return HennebergStep(int(v), (int(j), int(k)))


def recover_henneberg(
    vertices: Iterable, edges: Iterable[Sequence], rng: np.random.Generator | None = None
) -> tuple[list[HennebergStep], dict] | None:
    """Find a vertex-add sequence producing the given graph, or ``None``.

    Repeatedly peels a degree-2 vertex whose two neighbors are adjacent.  Ties
    go to the smallest vertex, or to a random candidate when ``rng`` is given.

    Returns ``(steps, labels)`` where ``labels`` maps each input vertex to its
    label in the construction, so that ``build_graph(steps)`` equals the input
    graph relabeled through ``labels``.
    """
    verts = list(vertices)
    n = len(verts)
    adj: dict = {v: set() for v in verts}
    m = 0
    for a, b in edges:
        if a == b or a not in adj or b not in adj or b in adj[a]:
            return None
        adj[a].add(b)
        adj[b].add(a)
        m += 1
    if n < 2 or m != 2 * n - 3:
        return None

    removed = []  # (vertex, (u, w)) in peeling order
    alive = set(verts)
    while len(alive) > 2:
        cands = [
            v for v in alive
            if len(adj[v]) == 2 and _adjacent(adj, *adj[v])
        ]
        if not cands:
            return None
        if rng is None:
            v = min(cands, key=_sort_key)
        else:
            cands.sort(key=_sort_key)
            v = cands[int(rng.integers(len(cands)))]
        u, w = adj[v]
        removed.append((v, (u, w)))
        adj[u].discard(v)
        adj[w].discard(v)
        del adj[v]
        alive.discard(v)

    a, b = sorted(alive, key=_sort_key)
    if b not in adj[a]:
        return None
    labels = {a: 1, b: 2}
    steps = []
    for v, (u, w) in reversed(removed):
        labels[v] = len(labels) + 1
        steps.append(HennebergStep(labels[v], (labels[u], labels[w])))
    return steps, labels


def _adjacent(adj, u, w) -> bool:
    return w in adj[u]


def _sort_key(v):
    return (str(type(v)), v)


def three_cycles(graph: TriangulatedLamanGraph) -> list[tuple[int, int, int]]:
    """All vertex triples spanning a triangle, in lexicographic order."""
    es = set(graph.edges)
    out = []
    for i, j in graph.edges:
        for k in range(j + 1, graph.vertex_count + 1):
            if (i, k) in es and (j, k) in es:
                out.append((i, j, k))
    return sorted(out)


def validate_targets(
    graph: TriangulatedLamanGraph, targets: Mapping[Edge, float]
) -> list[tuple[int, int, int]]:
    """Return the 3-cycles whose targets violate a strict triangle inequality.

    An empty list means the targets are admissible.
    """
    t = normalize_targets(graph, targets)
    bad = []
    for i, j, k in three_cycles(graph):
        a, b, c = t[(i, j)], t[(i, k)], t[(j, k)]
        if not (a + b > c and a + c > b and b + c > a):
            bad.append((i, j, k))
    return bad


def normalize_targets(
    graph: TriangulatedLamanGraph, targets: Mapping[Edge, float]
) -> dict[Edge, float]:
    t = {edge_key(*e): float(d) for e, d in targets.items()}
    for e in graph.edges:
        if e not in t:
            raise TargetError(f"no target distance for edge {e}")
        if not t[e] > 0:
            raise TargetError(f"target distance for edge {e} must be positive, got {t[e]}")
    return {e: t[e] for e in graph.edges}


def random_steps(n: int, rng: np.random.Generator) -> list[HennebergStep]:
    """A random vertex-add sequence on ``n`` vertices (uniform parent edge per step)."""
    if n < 2:
        raise ValueError("need at least two vertices")
    edges = [(1, 2)]
    steps = []
    for v in range(3, n + 1):
        j, k = edges[int(rng.integers(len(edges)))]
        steps.append(HennebergStep(v, (j, k)))
        edges += [(j, v), (k, v)]
    return steps


def random_targets(
    graph: TriangulatedLamanGraph,
    rng: np.random.Generator,
    min_sine: float = 0.3,
    length_range: tuple[float, float] = (0.6, 1.8),
) -> dict[Edge, float]:
    """Generic targets realized by a random configuration with well-shaped triangles.

    Each new vertex is placed so that every angle of its new triangle has sine
    at least ``min_sine``; the strict triangle inequalities then hold with margin.
    """
    lo, hi = length_range
    pts = np.zeros((graph.vertex_count, 2))
    pts[1] = [rng.uniform(lo, hi), 0.0]
    for s in graph.steps:
        j, k = s.parent_edge
        xj, xk = pts[j - 1], pts[k - 1]
        for _ in range(1000):
            cand = xj + rng.uniform(-hi, hi, size=2)
            dj = np.linalg.norm(cand - xj)
            dk = np.linalg.norm(cand - xk)
            if not (lo <= dj <= hi and lo <= dk <= hi):
                continue
            if _min_sine(xj, xk, cand) >= min_sine:
                break
        else:
            raise RuntimeError("could not place a well-shaped triangle")
        pts[s.new_vertex - 1] = cand
    return {(i, j): float(np.linalg.norm(pts[i - 1] - pts[j - 1])) for i, j in graph.edges}


def _min_sine(a, b, c) -> float:
    best = np.inf
    for p, q, r in ((a, b, c), (b, c, a), (c, a, b)):
        u, w = q - p, r - p
        cr = abs(u[0] * w[1] - u[1] * w[0])
        best = min(best, cr / (np.linalg.norm(u) * np.linalg.norm(w)))
    return best


def is_triangulated_laman(vertices: Iterable, edges: Iterable[Sequence]) -> bool:
    return recover_henneberg(vertices, edges) is not None
