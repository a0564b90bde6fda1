"""A formation on a triangulated Laman graph with one interaction law per edge.

The equations of motion are the gradient descent ``p' = -grad Phi(p)`` of

    Phi(p) = sum over edges (i, j) of  int_1^{d_ij} t f_ij(t) dt,

so agent ``i`` moves with velocity ``sum_j f_ij(d_ij) (x_j - x_i)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .geometry import DomainError, as_configuration
from .graph import Edge, TriangulatedLamanGraph, edge_key, validate_targets
from .laws import InteractionLaw, LawFamily, standard_law


@dataclass(frozen=True)
class _Group:
    family: LawFamily
    rows: np.ndarray  # positions in graph.edges
    targets: np.ndarray


@dataclass(frozen=True, eq=False)
class FormationSystem:
    graph: TriangulatedLamanGraph
    laws: Mapping[Edge, InteractionLaw]
    _groups: tuple = field(init=False, repr=False)
    _incidence: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        laws = {edge_key(*e): law for e, law in self.laws.items()}
        missing = [e for e in self.graph.edges if e not in laws]
        if missing:
            raise ValueError(f"no interaction law for edge {missing[0]}")
        laws = {e: laws[e] for e in self.graph.edges}
        object.__setattr__(self, "laws", laws)

        by_family: dict[int, list[int]] = {}
        fams = {}
        for row, e in enumerate(self.graph.edges):
            fam = laws[e].family
            by_family.setdefault(id(fam), []).append(row)
            fams[id(fam)] = fam
        groups = tuple(
            _Group(fams[key], np.asarray(rows), np.array([laws[self.graph.edges[r]].target for r in rows]))
            for key, rows in by_family.items()
        )
        object.__setattr__(self, "_groups", groups)

        inc = np.zeros((len(self.graph.edges), self.graph.vertex_count))
        i, j = self.graph.edge_arrays()
        rows = np.arange(len(self.graph.edges))
        inc[rows, i] = 1.0
        inc[rows, j] = -1.0
        object.__setattr__(self, "_incidence", inc)

    @property
    def n(self) -> int:
        return self.graph.vertex_count

    @property
    def targets(self) -> dict[Edge, float]:
        return {e: law.target for e, law in self.laws.items()}

    def target_violations(self) -> list[tuple[int, int, int]]:
        return validate_targets(self.graph, self.targets)

    def edge_differences(self, p) -> np.ndarray:
        """``x_i - x_j`` for every edge ``(i, j)``."""
        return self._incidence @ as_configuration(p, self.n)

    def edge_terms(self, p, derivative: bool = False):
        """Per-edge ``(diff, d, f)`` and, optionally, ``f'``."""
        diff = self.edge_differences(p)
        d = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        if np.any(d == 0):
            e = self.graph.edges[int(np.flatnonzero(d == 0)[0])]
            raise DomainError(f"adjacent agents coincide on edge {e}")
        f = self.law_values(d)
        if derivative:
            return diff, d, f, self.law_values(d, "df")
        return diff, d, f

    def law_values(self, d, which: str = "f") -> np.ndarray:
        """Evaluate every edge's law at the per-edge lengths ``d``.

        ``which`` is ``"f"``, ``"df"``, ``"slope"`` (for ``(x f)'``) or ``"potential"``.
        """
        d = np.asarray(d, dtype=float)
        out = np.empty_like(d)
        for g in self._groups:
            dd = d[g.rows]
            fam = g.family
            if which == "f":
                out[g.rows] = fam.f(dd, g.targets)
            elif which == "df":
                out[g.rows] = fam.df(dd, g.targets)
            elif which == "slope":
                out[g.rows] = fam.f(dd, g.targets) + dd * fam.df(dd, g.targets)
            elif which == "potential":
                if fam.potential is not None:
                    out[g.rows] = fam.potential(dd, g.targets)
                else:
                    out[g.rows] = [self.laws[self.graph.edges[r]].edge_potential(x)
                                   for r, x in zip(g.rows, dd)]
            else:
                raise ValueError(f"unknown law quantity {which!r}")
        return out

    def subsystem(self, graph: TriangulatedLamanGraph, vertices) -> "FormationSystem":
        """The system induced on ``graph``, whose vertex ``k`` is our ``vertices[k-1]``."""
        laws = {}
        for a, b in graph.edges:
            laws[(a, b)] = self.laws[edge_key(vertices[a - 1], vertices[b - 1])]
        return FormationSystem(graph, laws)


def uniform_system(graph: TriangulatedLamanGraph, targets: Mapping[Edge, float] | float = 1.0,
                   family=standard_law) -> FormationSystem:
    """System with one law family on every edge; ``targets`` is a map or a single value."""
    if np.isscalar(targets):
        targets = {e: float(targets) for e in graph.edges}
    laws = {edge_key(*e): family(t) for e, t in targets.items()}
    return FormationSystem(graph, laws)


def potential(system: FormationSystem, p) -> float:
    _, d, _ = system.edge_terms(p)
    return float(np.sum(system.law_values(d, "potential")))


def gradient(system: FormationSystem, p) -> np.ndarray:
    """``grad Phi`` as an ``(N, 2)`` array."""
    diff, _, f = system.edge_terms(p)
    return system._incidence.T @ (f[:, None] * diff)


def vector_field(system: FormationSystem, p) -> np.ndarray:
    """Agent velocities ``sum_j f_ij(d_ij) (x_j - x_i)``."""
    return -gradient(system, p)


def residual(system: FormationSystem, p) -> float:
    """``max |grad Phi|`` over all coordinates."""
    return float(np.max(np.abs(gradient(system, p))))
