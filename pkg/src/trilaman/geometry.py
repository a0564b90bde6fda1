"""Planar configurations, the SE(2) action and rigidity predicates.

A configuration is an ``(N, 2)`` float array; row ``i - 1`` holds the
position of agent ``i``.  Flattened vectors use the interleaved order
``(x1, y1, x2, y2, ...)`` unless stated otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import TriangulatedLamanGraph, three_cycles

COLLINEARITY_TOL = 1e-7
RANK_TOL = 1e-8


class DomainError(ValueError):
    """The configuration lies outside the admissible configuration space."""


class GaugeError(ValueError):
    pass


def as_configuration(p, n: int | None = None) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim == 1 and p.size % 2 == 0:
        p = p.reshape(-1, 2)
    if p.ndim != 2 or p.shape[1] != 2:
        raise ValueError(f"expected an (N, 2) array of planar points, got shape {p.shape}")
    if n is not None and p.shape[0] != n:
        raise ValueError(f"expected {n} points, got {p.shape[0]}")
    return p


def check_admissible(graph: TriangulatedLamanGraph, p) -> np.ndarray:
    """Raise :class:`DomainError` if two adjacent agents coincide."""
    p = as_configuration(p, graph.vertex_count)
    i, j = graph.edge_arrays()
    d = np.linalg.norm(p[i] - p[j], axis=1)
    bad = np.flatnonzero(d == 0)
    if bad.size:
        raise DomainError(f"adjacent agents coincide on edge {graph.edges[bad[0]]}")
    return p


def rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class SE2:
    """A rigid motion ``x -> R(theta) x + v`` (no reflections)."""

    theta: float = 0.0
    v: tuple[float, float] = (0.0, 0.0)

    @property
    def matrix(self) -> np.ndarray:
        return rotation(self.theta)

    @property
    def translation(self) -> np.ndarray:
        return np.asarray(self.v, dtype=float)

    def inverse(self) -> "SE2":
        r = rotation(-self.theta)
        return SE2(-self.theta, tuple(-(r @ self.translation)))

    @classmethod
    def random(cls, rng: np.random.Generator, scale: float = 5.0) -> "SE2":
        return cls(float(rng.uniform(-np.pi, np.pi)), tuple(rng.uniform(-scale, scale, 2)))


IDENTITY = SE2()


def se2_compose(g2: SE2, g1: SE2) -> SE2:
    """``g2 * g1``: first apply ``g1``, then ``g2``."""
    v = g2.matrix @ g1.translation + g2.translation
    theta = np.arctan2(np.sin(g2.theta + g1.theta), np.cos(g2.theta + g1.theta))
    return SE2(float(theta), (float(v[0]), float(v[1])))


def se2_apply(g: SE2, p) -> np.ndarray:
    p = as_configuration(p)
    return p @ g.matrix.T + g.translation


def rho(graph: TriangulatedLamanGraph, p) -> np.ndarray:
    """Squared edge lengths, in the graph's (lexicographic) edge order."""
    p = as_configuration(p, graph.vertex_count)
    i, j = graph.edge_arrays()
    diff = p[i] - p[j]
    return np.einsum("ij,ij->i", diff, diff)


def edge_lengths(graph: TriangulatedLamanGraph, p) -> np.ndarray:
    return np.sqrt(rho(graph, p))


def rigidity_matrix(graph: TriangulatedLamanGraph, p) -> np.ndarray:
    """Jacobian of :func:`rho`, shape ``(|E|, 2N)`` in interleaved coordinates."""
    p = as_configuration(p, graph.vertex_count)
    i, j = graph.edge_arrays()
    m = len(graph.edges)
    jac = np.zeros((m, 2 * graph.vertex_count))
    diff = 2.0 * (p[i] - p[j])
    rows = np.arange(m)
    for c in range(2):
        jac[rows, 2 * i + c] = diff[:, c]
        jac[rows, 2 * j + c] = -diff[:, c]
    return jac


def numerical_rank(a: np.ndarray, rank_tol: float = RANK_TOL) -> int:
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.count_nonzero(s > rank_tol * s[0]))


def is_infinitesimally_rigid(graph: TriangulatedLamanGraph, p, rank_tol: float = RANK_TOL) -> bool:
    p = check_admissible(graph, p)
    return numerical_rank(rigidity_matrix(graph, p), rank_tol) == 2 * graph.vertex_count - 3


def collinearity(a, b, c) -> float:
    """Scale-invariant flatness of the triangle ``abc``.

    The largest over the three vertices of ``|cross(u, w)| / (|u| |w|)``, where
    ``u, w`` are the two sides at that vertex, i.e. the largest sine among the
    three angles.  Zero exactly when the points are collinear.
    """
    a, b, c = (np.asarray(x, dtype=float) for x in (a, b, c))
    best = 0.0
    for p, q, r in ((a, b, c), (b, c, a), (c, a, b)):
        u, w = q - p, r - p
        nu, nw = np.hypot(*u), np.hypot(*w)
        if nu == 0 or nw == 0:
            continue
        best = max(best, abs(u[0] * w[1] - u[1] * w[0]) / (nu * nw))
    return best


def is_aligned(a, b, c, tol: float = COLLINEARITY_TOL) -> bool:
    return collinearity(a, b, c) < tol


def is_strongly_rigid(graph: TriangulatedLamanGraph, p, collinearity_tol: float = COLLINEARITY_TOL) -> bool:
    p = check_admissible(graph, p)
    return all(
        not is_aligned(p[i - 1], p[j - 1], p[k - 1], collinearity_tol)
        for i, j, k in three_cycles(graph)
    )


def is_line_configuration(p, tol: float = COLLINEARITY_TOL) -> bool:
    """All points on one line, up to ``tol`` relative to the spread of the points."""
    p = as_configuration(p)
    if len(p) <= 2:
        return True
    centered = p - p.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    if s[0] == 0:
        return True
    return bool(s[1] <= tol * s[0])


def line_direction(p) -> np.ndarray:
    """Unit direction of the best-fit line through the points."""
    centered = as_configuration(p) - np.mean(p, axis=0)
    _, _, vt = np.linalg.svd(centered)
    d = vt[0]
    # fix the sign so the direction is reproducible
    if d[0] < 0 or (d[0] == 0 and d[1] < 0):
        d = -d
    return d


def _optimal_rotation(p: np.ndarray, q: np.ndarray) -> float:
    # angle of the rotation R minimizing |R p - q| for centered p, q
    dot = np.sum(p * q)
    cross = np.sum(p[:, 0] * q[:, 1] - p[:, 1] * q[:, 0])
    return float(np.arctan2(cross, dot))


def align(p, q) -> tuple[np.ndarray, SE2]:
    """Rigid motion (rotation + translation) that best maps ``p`` onto ``q``."""
    p = as_configuration(p)
    q = as_configuration(q, len(p))
    cp, cq = p.mean(axis=0), q.mean(axis=0)
    theta = _optimal_rotation(p - cp, q - cq)
    r = rotation(theta)
    v = cq - r @ cp
    g = SE2(theta, (float(v[0]), float(v[1])))
    return se2_apply(g, p), g


def orbit_distance(p, q) -> float:
    """RMS point mismatch after optimally moving ``p`` onto ``q`` by SE(2)."""
    moved, _ = align(p, q)
    q = as_configuration(q)
    return float(np.sqrt(np.mean(np.sum((moved - q) ** 2, axis=1))))


def canonical_gauge(p) -> SE2:
    """The rigid motion placing agent 1 at the origin and agent 2 on the positive x-axis."""
    p = as_configuration(p)
    u = p[1] - p[0]
    if np.hypot(*u) == 0:
        raise GaugeError("agents 1 and 2 coincide; canonical gauge undefined")
    theta = -np.arctan2(u[1], u[0])
    r = rotation(theta)
    v = -(r @ p[0])
    return SE2(float(theta), (float(v[0]), float(v[1])))


def canonicalize(p) -> np.ndarray:
    out = se2_apply(canonical_gauge(p), p)
    out[0] = 0.0
    out[1, 1] = 0.0
    return out


def align_to_x_axis(p) -> np.ndarray:
    """Rotate and translate a (near-)line configuration onto the x-axis."""
    p = as_configuration(p)
    d = line_direction(p)
    theta = -np.arctan2(d[1], d[0])
    out = (p - p.mean(axis=0)) @ rotation(theta).T
    return out


def interleaved_to_split(n: int) -> np.ndarray:
    """Permutation taking interleaved coordinates to ``(x1..xN, y1..yN)``."""
    return np.concatenate([np.arange(0, 2 * n, 2), np.arange(1, 2 * n, 2)])
