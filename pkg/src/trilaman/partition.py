"""Independent partition of a framework's edge set into aligned sub-frameworks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import COLLINEARITY_TOL, as_configuration, collinearity, line_direction
from .graph import Edge, HennebergStep, TriangulatedLamanGraph, build_graph, edge_key
from .system import FormationSystem, residual


@dataclass(frozen=True)
class Block:
    edges: tuple[Edge, ...]
    vertices: tuple[int, ...]  # original labels, in the block's own construction order
    graph: TriangulatedLamanGraph  # relabeled 1..len(vertices)
    configuration: np.ndarray

    @property
    def direction(self) -> np.ndarray:
        return line_direction(self.configuration)


@dataclass(frozen=True)
class IndependentPartition:
    blocks: tuple[Block, ...]
    fragile: tuple[int, ...] = field(default=())  # 1-based steps whose alignment test was near the threshold

    @property
    def edge_sets(self) -> list[frozenset]:
        return [frozenset(b.edges) for b in self.blocks]

    def as_set(self) -> frozenset:
        return frozenset(self.edge_sets)

    def __len__(self):
        return len(self.blocks)


def independent_partition(graph: TriangulatedLamanGraph, p,
                          collinearity_tol: float = COLLINEARITY_TOL) -> IndependentPartition:
    """Follow the graph's construction, merging each new pair of edges into the
    block of its parent edge when the new vertex is aligned with the parents."""
    p = as_configuration(p, graph.vertex_count)
    block_of: dict[Edge, int] = {(1, 2): 0}
    members: list[list] = [[(1, 2)]]
    # per block: base edge and the steps that grew it
    growth: list[list] = [[(1, 2)]]
    fragile = []
    for pos, step in enumerate(graph.steps, start=1):
        v = step.new_vertex
        j, k = step.parent_edge
        measure = collinearity(p[j - 1], p[k - 1], p[v - 1])
        if collinearity_tol / 10 <= measure < 10 * collinearity_tol:
            fragile.append(pos)
        new = [edge_key(j, v), edge_key(k, v)]
        if measure < collinearity_tol:
            b = block_of[step.parent_edge]
            members[b].extend(new)
            growth[b].append(step)
            for e in new:
                block_of[e] = b
        else:
            for e in new:
                block_of[e] = len(members)
                members.append([e])
                growth.append([e])

    blocks = tuple(_make_block(g, p) for g in growth)
    return IndependentPartition(blocks, tuple(fragile))


def _make_block(growth, p) -> Block:
    a, b = growth[0]
    labels = {a: 1, b: 2}
    order = [a, b]
    steps = []
    edges = [growth[0]]
    for step in growth[1:]:
        v = step.new_vertex
        j, k = step.parent_edge
        labels[v] = len(labels) + 1
        order.append(v)
        steps.append(HennebergStep(labels[v], (labels[j], labels[k])))
        edges += [edge_key(j, v), edge_key(k, v)]
    sub = build_graph(steps)
    return Block(tuple(sorted(edges)), tuple(order), sub, p[np.asarray(order) - 1].copy())


def block_subsystem(system: FormationSystem, block: Block) -> FormationSystem:
    return system.subsystem(block.graph, block.vertices)


def partition_is_equilibrium_compatible(system: FormationSystem, p, partition: IndependentPartition,
                                        tol: float = 1e-10) -> bool:
    """Whether every block's configuration is an equilibrium of its induced subsystem."""
    r = residual(system, p)
    if r > tol:
        raise ValueError(f"configuration is not an equilibrium (residual {r:.3e} > {tol:.1e})")
    return all(
        residual(block_subsystem(system, b), b.configuration) <= 10 * tol
        for b in partition.blocks
    )
