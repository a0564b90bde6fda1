"""Every target orbit of a five-agent formation, and why each one is stable.

Each new agent can sit on either side of its parent edge, so a graph built
from ``N - 2`` vertex-add steps has ``2**(N-2)`` ways to meet all its target
distances.  We build them all, check none coincide, and look at the Hessian.
"""

import numpy as np

from trilaman import build_graph, classify_orbit, enumerate_target_orbits, uniform_system
from trilaman.graph import random_targets

graph = build_graph([(3, 1, 2), (4, 2, 3), (5, 3, 4)])
targets = random_targets(graph, np.random.default_rng(7))
system = uniform_system(graph, targets)

catalog = enumerate_target_orbits(graph, targets)
print(f"{len(catalog)} target orbits (expected {2 ** (graph.vertex_count - 2)})")

for word, p in zip(catalog.sign_words, catalog.configurations):
    c = classify_orbit(system, p)
    top = np.max(c.eigenvalues[np.abs(c.eigenvalues) > 1e-9])
    print(f"  sides {word}: {c.kind.value:>7}  signature {c.signature}  "
          f"slowest decay rate {-top:.4f}")

# The three zero eigenvalues are the rigid motions; everything else decays.
