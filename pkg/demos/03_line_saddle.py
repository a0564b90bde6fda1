"""The collinear triangle: an equilibrium nobody should settle on.

Three agents with unit targets can balance on a line with the middle agent
at distance 1/sqrt(2) from both ends.  The transverse block of the Hessian
has a positive eigenvalue, so the smallest sideways nudge grows.
"""

import numpy as np

from trilaman import build_graph, classify_orbit, find_line_equilibria, integrate, uniform_system
from trilaman.spectral import line_block_hessian

system = uniform_system(build_graph([(3, 1, 2)]), 1.0)
(rec,) = find_line_equilibria(system, (2, 1, 3))  # agent 1 in the middle
p = rec.configuration
print("saddle positions along the line:", np.round(p[:, 0], 12))
print("d12, d13 =", np.linalg.norm(p[0] - p[1]), np.linalg.norm(p[0] - p[2]))

blocks = line_block_hessian(system, p)
print("along-line block eigenvalues:", np.round(np.linalg.eigvalsh(blocks.A), 6))
print("transverse block eigenvalues:", np.round(np.linalg.eigvalsh(blocks.B), 6))
print("classification:", classify_orbit(system, p).kind.value)

nudged = p.copy()
nudged[0, 1] += 1e-6
traj = integrate(system, nudged)
final = traj.final
print(f"after a 1e-6 nudge the triangle opens up: side lengths "
      f"{[round(float(np.linalg.norm(final[a] - final[b])), 6) for a, b in [(0, 1), (0, 2), (1, 2)]]}")
