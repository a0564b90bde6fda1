"""Splitting a degenerate equilibrium into independent pieces.

We glue a collinear three-agent saddle onto an equilateral triangle.  The
independent partition then has one aligned block plus singletons, and the
signature of the whole Hessian is the sum of the block signatures.  Finally,
on a fully collinear equilibrium, deleting the last agent changes each block
of the line Hessian by exactly one sign.
"""

import numpy as np

from trilaman import build_graph, find_line_equilibria, uniform_system
from trilaman.analysis import verify_morse_bott, verify_reduction_formula
from trilaman.system import residual

graph = build_graph([(3, 1, 2), (4, 2, 3), (5, 3, 4)])

p = np.zeros((5, 2))
p[1] = [1.0, 0.0]
p[2] = [0.5, np.sqrt(3) / 2]
u = np.array([np.cos(1.0), np.sin(1.0)])
p[3] = p[2] + np.sqrt(2) * u       # agents 3 and 4 at the saddle's outer spacing
p[4] = p[2] + np.sqrt(0.5) * u     # agent 5 in the middle

targets = {e: 1.0 for e in graph.edges}
targets[(2, 4)] = float(np.linalg.norm(p[1] - p[3]))  # let edge 2-4 sit at its target
system = uniform_system(graph, targets)
print(f"residual at the glued configuration: {residual(system, p):.1e}")

mb = verify_morse_bott(system, p)
for edges, sig in zip(mb.block_edges, mb.block_signatures):
    print(f"  block {list(edges)}: signature {sig}")
print(f"whole Hessian {mb.signature}; blocks add up to n- = {mb.minus_sum}, n+ = {mb.plus_sum}")

line = uniform_system(graph, 1.0)
for rec in find_line_equilibria(line, (1, 2, 3, 4, 5))[:2]:
    red = verify_reduction_formula(line, rec.configuration)
    print(f"line equilibrium, drop agent {red.removed_vertex}: "
          f"A {red.sig_A} = {red.sig_A_reduced} + {red.sgn_A}, "
          f"B {red.sig_B} = {red.sig_B_reduced} + {red.sgn_B}")
