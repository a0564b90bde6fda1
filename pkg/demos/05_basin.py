"""How often does a random start end at a target formation?

Each trial draws its own counter-based random stream, so the tallies below are
the same whether trials run serially or across worker processes.
"""

import numpy as np

from trilaman import build_graph, uniform_system
from trilaman.analysis import basin_monte_carlo, enumerate_target_orbits
from trilaman.graph import random_targets

graph = build_graph([(3, 1, 2), (4, 2, 3), (5, 3, 4)])
system = uniform_system(graph, random_targets(graph, np.random.default_rng(7)))
catalog = enumerate_target_orbits(graph, system.targets)

report = basin_monte_carlo(system, 200, seed=2024, catalog=catalog)
print(f"{report.target_fraction:.1%} of {report.trials} runs reached a target orbit "
      f"({report.non_target} elsewhere, {report.failures} failures)")
for k, hits in report.hits.items():
    print(f"  orbit {catalog.sign_words[k]}: {hits:4d}  " + "#" * (hits // 2))
