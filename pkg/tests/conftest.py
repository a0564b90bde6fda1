import numpy as np
import pytest

from trilaman.graph import build_graph, random_steps, random_targets
from trilaman.system import uniform_system


@pytest.fixture
def triangle():
    return build_graph([(3, 1, 2)])


@pytest.fixture
def triangle_system(triangle):
    return uniform_system(triangle, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def fan5():
    # the Fig. 2 style graph: 3 on (1,2), 4 on (2,3), 5 on (3,4)
    return build_graph([(3, 1, 2), (4, 2, 3), (5, 3, 4)])


@pytest.fixture
def generic_system(rng):
    g = build_graph(random_steps(5, rng))
    return uniform_system(g, random_targets(g, rng))
