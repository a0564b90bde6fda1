import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import helpers
from trilaman.dynamics import find_line_equilibria
from trilaman.geometry import SE2, se2_apply
from trilaman.graph import build_graph, random_steps, random_targets
from trilaman.spectral import (
    OrbitType,
    Signature,
    classify_orbit,
    hessian,
    laplacian_from_weights,
    line_block_hessian,
    potential_hessian,
    rigid_motion_null_vectors,
    sign_vector,
    signature_from_eigenvalues,
    signature_of,
    split_coordinates,
)
from trilaman.system import uniform_system

EQUILATERAL = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])


@pytest.mark.parametrize("ev, expected", [
    ([1.0, -2.0, 0.0], (1, 1, 1)),
    ([1e-9, -1e-9, 5.0], (1, 0, 2)),
    ([], (0, 0, 0)),
])
def test_signature_counts(ev, expected):
    assert signature_from_eigenvalues(ev).as_tuple() == expected


def test_signature_arithmetic():
    s = Signature(1, 2, 3, 1e-6) + (0, 1, 0)
    assert s.as_tuple() == (1, 3, 3)
    assert str(s) == "(1, 3, 3)"


@pytest.mark.parametrize("x, out", [(2.0, (1, 0, 0)), (-1.0, (0, 1, 0)), (0.0, (0, 0, 1))])
def test_sign_vector(x, out):
    assert sign_vector(x) == out


def test_signature_of_matrix():
    assert signature_of(np.diag([3.0, -1.0, 0.0, 0.0])).as_tuple() == (1, 1, 2)


def test_equilateral_triangle_stable(triangle_system):
    c = classify_orbit(triangle_system, EQUILATERAL)
    assert c.kind == OrbitType.STABLE
    assert c.signature.as_tuple() == (0, 3, 3)
    assert c.index == 3 and c.coindex == 0


def test_hessian_sign_convention(triangle_system):
    np.testing.assert_array_equal(hessian(triangle_system, EQUILATERAL),
                                  -potential_hessian(triangle_system, EQUILATERAL))


def test_triangle_saddle(triangle_system):
    (rec,) = find_line_equilibria(triangle_system, (2, 1, 3))
    c = classify_orbit(triangle_system, rec.configuration)
    assert c.kind == OrbitType.SADDLE
    assert c.signature.as_tuple() == (1, 2, 3)


def test_non_equilibrium_rejected(triangle_system):
    p = np.array([[0.0, 0.0], [2.0, 0.0], [0.3, 1.7]])
    with pytest.raises(ValueError, match="zero eigenvalues"):
        classify_orbit(triangle_system, p)


def test_line_blocks_match_full_hessian(rng):
    g = build_graph(random_steps(5, rng))
    system = uniform_system(g, random_targets(g, rng))
    p = np.column_stack([rng.permutation(5) + rng.uniform(0, 0.3, 5), np.zeros(5)])
    blocks = line_block_hessian(system, p)
    np.testing.assert_allclose(split_coordinates(hessian(system, p)), blocks.assembled(), atol=1e-12)
    np.testing.assert_allclose(blocks.A.sum(axis=1), 0, atol=1e-12)
    np.testing.assert_allclose(blocks.B.sum(axis=1), 0, atol=1e-12)


def test_line_block_requires_axis(triangle_system):
    with pytest.raises(ValueError, match="x-axis"):
        line_block_hessian(triangle_system, EQUILATERAL)


def test_null_vectors_at_line_equilibrium(rng):
    g = build_graph(random_steps(4, rng))
    system = uniform_system(g, random_targets(g, rng))
    recs = find_line_equilibria(system, (1, 2, 3, 4))
    assert recs
    p = recs[0].configuration
    h = split_coordinates(hessian(system, p))
    for v in rigid_motion_null_vectors(p):
        np.testing.assert_allclose(h @ v, 0, atol=1e-8)


def test_laplacian_from_weights():
    m = laplacian_from_weights(3, [(1, 2), (2, 3)], [2.0, 5.0])
    np.testing.assert_array_equal(m, [[-2, 2, 0], [2, -7, 5], [0, 5, -5]])


@given(st.integers(2, 7), st.integers(0, 2**32 - 1), st.floats(-np.pi, np.pi))
@settings(max_examples=40, deadline=None)
def test_isospectral_under_motion(n, seed, theta):
    rng = np.random.default_rng(seed)
    g = build_graph(random_steps(n, rng))
    system = uniform_system(g, random_targets(g, rng))
    p = helpers.separated_points(g, rng)
    q = se2_apply(SE2(theta, (0.3, 4.0)), p)
    np.testing.assert_allclose(np.linalg.eigvalsh(hessian(system, q)),
                               np.linalg.eigvalsh(hessian(system, p)), atol=1e-8)


def test_hessian_matches_finite_differences(generic_system, rng):
    p = helpers.separated_points(generic_system.graph, rng)
    np.testing.assert_allclose(potential_hessian(generic_system, p),
                               helpers.fd_hessian(generic_system, p), atol=1e-6)
