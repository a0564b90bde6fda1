import math

import numpy as np
import pytest

from trilaman.dynamics import (
    Controls,
    IntegrationError,
    find_line_equilibria,
    integrate,
    line_orderings,
    refine_equilibrium,
)
from trilaman.geometry import DomainError, edge_lengths, orbit_distance
from trilaman.graph import build_graph, random_steps, random_targets
from trilaman.laws import LawFamily
from trilaman.system import FormationSystem, potential, residual, uniform_system

EQUILATERAL = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])


def test_triangle_converges(triangle_system, rng):
    p0 = rng.uniform(-2, 2, size=(3, 2))
    traj = integrate(triangle_system, p0)
    assert traj.converged
    assert traj.residuals[-1] <= 1.001e-7
    np.testing.assert_allclose(edge_lengths(triangle_system.graph, traj.final), 1.0, atol=1e-6)
    # the potential never increases along the flow
    assert np.all(np.diff(traj.potentials) <= 1e-9)


def test_rows_layout(triangle_system, rng):
    traj = integrate(triangle_system, rng.uniform(-2, 2, size=(3, 2)))
    rows = traj.rows()
    assert rows.shape == (len(traj.times), 1 + 6 + 2)
    np.testing.assert_array_equal(rows[:, 0], traj.times)


def test_sampling_grid(triangle_system):
    p0 = np.array([[0.0, 0.0], [3.0, 0.0], [0.0, 3.0]])
    traj = integrate(triangle_system, p0, controls=Controls(sample_interval=0.25))
    steps = np.diff(traj.times[:-1])
    np.testing.assert_allclose(steps, 0.25)


def test_equilibrium_start_is_single_snapshot(triangle_system):
    traj = integrate(triangle_system, EQUILATERAL)
    assert len(traj.times) == 1 and traj.converged


def test_horizon_reached_without_convergence(triangle_system):
    p0 = np.array([[0.0, 0.0], [5.0, 0.0], [0.0, 5.0]])
    traj = integrate(triangle_system, p0, horizon=0.1)
    assert not traj.converged
    assert traj.times[-1] == pytest.approx(0.1)


def test_bad_horizon(triangle_system):
    with pytest.raises(ValueError):
        integrate(triangle_system, EQUILATERAL * 2, horizon=0.0)


def test_coincident_start_rejected(triangle_system):
    with pytest.raises(DomainError):
        integrate(triangle_system, [[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]])


def test_failure_keeps_partial_trajectory(triangle):
    # a law that overflows once a pair is pushed past distance 3
    def f(d, t):
        d = np.asarray(d, dtype=float)
        if np.any(d >= 3.0):
            return d * np.float64(1e308) * np.float64(1e308)
        return d - t

    fam = LawFamily("brittle", f, lambda d, t: np.ones_like(d))
    system = FormationSystem(triangle, {e: fam(10.0) for e in triangle.edges})
    p0 = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 0.8]])
    with pytest.raises(IntegrationError) as info:
        integrate(system, p0, controls=Controls(sample_interval=0.01))
    traj = info.value.trajectory
    assert traj is not None and len(traj.times) > 1
    assert not traj.converged
    np.testing.assert_array_equal(traj.states[0], p0)


def test_refine_sharpens(triangle_system, rng):
    p = EQUILATERAL + 1e-3 * rng.normal(size=(3, 2))
    rec = refine_equilibrium(triangle_system, p)
    assert rec.converged and rec.residual <= 1e-10
    assert orbit_distance(rec.configuration, EQUILATERAL) < 1e-3 + 1e-2
    # returned in the input's frame
    assert np.linalg.norm(rec.configuration - p) < 1e-2


def test_refine_noop_at_equilibrium(triangle_system):
    rec = refine_equilibrium(triangle_system, EQUILATERAL)
    assert rec.method == "none" and rec.iterations == 0


def test_refine_failure_returns_input(triangle_system):
    p = np.array([[0.0, 0.0], [1e-30, 0.0], [1.0, 0.0]])
    rec = refine_equilibrium(triangle_system, p, max_iter=2)
    assert not rec.converged
    assert rec.notes


@pytest.mark.parametrize("n, count", [(2, 1), (3, 3), (4, 12), (5, 60)])
def test_line_orderings(n, count):
    orders = list(line_orderings(n))
    assert len(orders) == count == math.factorial(n) // (2 if n > 1 else 1)
    assert len(set(orders)) == count


@pytest.mark.parametrize("order, middle", [((1, 2, 3), 2), ((2, 1, 3), 1), ((1, 3, 2), 3)])
def test_triangle_line_saddles(triangle_system, order, middle):
    (rec,) = find_line_equilibria(triangle_system, order)
    p = rec.configuration
    assert rec.residual <= 1e-10
    others = [v for v in (1, 2, 3) if v != middle]
    for v in others:
        assert np.linalg.norm(p[v - 1] - p[middle - 1]) == pytest.approx(2 ** -0.5, abs=1e-8)
    assert np.linalg.norm(p[others[0] - 1] - p[others[1] - 1]) == pytest.approx(2 ** 0.5, abs=1e-8)
    assert np.all(p[:, 1] == 0)


def test_line_equilibria_respect_order(rng):
    g = build_graph(random_steps(5, rng))
    system = uniform_system(g, random_targets(g, rng))
    for order in [(1, 2, 3, 4, 5), (3, 1, 5, 2, 4)]:
        for rec in find_line_equilibria(system, order):
            xs = rec.configuration[np.asarray(order) - 1, 0]
            assert np.all(np.diff(xs) > 0)
            assert residual(system, rec.configuration) <= 1e-10


def test_line_equilibria_bad_ordering(triangle_system):
    with pytest.raises(ValueError):
        find_line_equilibria(triangle_system, (1, 2, 2))


def test_flow_decreases_potential(generic_system, rng):
    p0 = rng.uniform(-3, 3, size=(5, 2))
    traj = integrate(generic_system, p0)
    assert traj.potentials[-1] <= potential(generic_system, p0)
