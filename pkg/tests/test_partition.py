import numpy as np
import pytest

import helpers
from trilaman.dynamics import find_line_equilibria
from trilaman.geometry import is_line_configuration
from trilaman.graph import build_graph, is_triangulated_laman
from trilaman.partition import independent_partition, partition_is_equilibrium_compatible
from trilaman.system import uniform_system

# x1, x2, x3 aligned and x3, x4, x5 aligned
TWO_GROUPS = np.array([[0.0, 0.0], [1.0, 0.0], [2.5, 0.0], [1.7, 1.0], [3.3, -1.0]])


def test_two_aligned_groups(fan5):
    # x4 sits on the line through x3 and x5
    p = TWO_GROUPS.copy()
    p[4] = p[2] + 1.6 * (p[3] - p[2])
    part = independent_partition(fan5, p)
    assert part.as_set() == {
        frozenset({(1, 2), (1, 3), (2, 3)}),
        frozenset({(2, 4)}),
        frozenset({(3, 4), (3, 5), (4, 5)}),
    }
    assert part.fragile == ()


def test_strongly_rigid_gives_singletons(fan5, rng):
    p = rng.normal(size=(5, 2))
    part = independent_partition(fan5, p)
    assert len(part) == len(fan5.edges)
    assert all(len(b.edges) == 1 for b in part.blocks)


def test_collinear_gives_one_block(fan5):
    p = np.column_stack([np.arange(5.0) ** 1.5, np.zeros(5)])
    part = independent_partition(fan5, p)
    assert len(part) == 1 and set(part.blocks[0].edges) == set(fan5.edges)


@pytest.mark.parametrize("seed", range(10))
def test_blocks_are_line_laman_and_cover(seed):
    rng = np.random.default_rng(seed)
    g = helpers.all_graphs(6)[seed % 5]
    p = helpers.line_degenerate_embedding(g, rng)
    part = independent_partition(g, p)
    covered = [e for b in part.blocks for e in b.edges]
    assert sorted(covered) == sorted(g.edges)
    for b in part.blocks:
        assert is_triangulated_laman(b.vertices, b.edges)
        assert is_line_configuration(b.configuration)
        assert build_graph(b.graph.steps).vertex_count == len(b.vertices)


def test_fragile_flag(triangle):
    p = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 3e-8]])
    # the largest angle sine here is about 1.2e-7, just above the tolerance
    part = independent_partition(triangle, p)
    assert part.fragile == (1,)
    assert len(part) == 3


def test_equilibrium_compatibility(triangle_system):
    (rec,) = find_line_equilibria(triangle_system, (1, 2, 3))
    part = independent_partition(triangle_system.graph, rec.configuration)
    assert len(part) == 1
    assert partition_is_equilibrium_compatible(triangle_system, rec.configuration, part)


def test_equilibrium_compatibility_at_target(triangle_system):
    p = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])
    part = independent_partition(triangle_system.graph, p)
    assert partition_is_equilibrium_compatible(triangle_system, p, part)


def test_compatibility_requires_equilibrium(triangle_system):
    p = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]])
    part = independent_partition(triangle_system.graph, p)
    with pytest.raises(ValueError, match="not an equilibrium"):
        partition_is_equilibrium_compatible(triangle_system, p, part)


def test_mixed_partition_equilibria_compatible(rng):
    # line equilibria of a 5-agent system, analyzed block by block
    g = build_graph([(3, 1, 2), (4, 2, 3), (5, 3, 4)])
    system = uniform_system(g, 1.0)
    recs = find_line_equilibria(system, (1, 2, 3, 4, 5))
    assert recs
    for rec in recs:
        part = independent_partition(g, rec.configuration)
        assert partition_is_equilibrium_compatible(system, rec.configuration, part)


@pytest.mark.parametrize("n", [4, 5, 6])
def test_brute_force_oracle(n):
    rng = np.random.default_rng(n)
    for g in helpers.all_graphs(n):
        p = helpers.line_degenerate_embedding(g, rng)
        alg = independent_partition(g, p).as_set()
        parts = helpers.brute_force_partitions(g, p)
        assert alg in parts
        assert all(helpers.refines(q, alg) for q in parts)
