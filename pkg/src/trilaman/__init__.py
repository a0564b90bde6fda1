"""Gradient formation control on triangulated Laman graphs, with spectral diagnostics."""

__version__ = "0.1.0"

from .graph import (  # noqa: E402
    HennebergError,
    HennebergStep,
    TargetError,
    TriangulatedLamanGraph,
    build_graph,
    recover_henneberg,
    three_cycles,
    validate_targets,
)
from .laws import (  # noqa: E402
    AFFINE,
    SCALED,
    STANDARD,
    InteractionLaw,
    LawFamily,
    check_C1,
    check_C2,
    standard_law,
)
from .geometry import (  # noqa: E402
    SE2,
    align,
    collinearity,
    is_infinitesimally_rigid,
    is_strongly_rigid,
    orbit_distance,
    rho,
    rigidity_matrix,
)
from .system import FormationSystem, gradient, potential, residual, uniform_system, vector_field  # noqa: E402
from .spectral import (  # noqa: E402
    OrbitType,
    Signature,
    classify_orbit,
    hessian,
    line_block_hessian,
    potential_hessian,
    signature_of,
)
from .dynamics import Controls, Trajectory, find_line_equilibria, integrate, refine_equilibrium  # noqa: E402
from .partition import IndependentPartition, independent_partition  # noqa: E402
from .analysis import (  # noqa: E402
    basin_monte_carlo,
    enumerate_target_orbits,
    stability_census,
    verify_morse_bott,
    verify_reduction_formula,
)
