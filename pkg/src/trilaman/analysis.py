"""Verification experiments: index formula, reduction formula, target orbits, basins."""

from __future__ import annotations

import itertools
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .dynamics import Controls, IntegrationError, integrate, refine_equilibrium
from .geometry import (
    COLLINEARITY_TOL,
    align_to_x_axis,
    as_configuration,
    canonicalize,
    edge_lengths,
    is_line_configuration,
    is_strongly_rigid,
    orbit_distance,
)
from .graph import Edge, TriangulatedLamanGraph, build_graph, edge_key, normalize_targets, validate_targets
from .partition import block_subsystem, independent_partition
from .spectral import (
    OrbitType,
    Signature,
    classify_orbit,
    hessian,
    laplacian_from_weights,
    line_block_hessian,
    sign_vector,
    signature_of,
)
from .system import FormationSystem, residual

ORBIT_RADIUS = 1e-4


# --------------------------------------------------------------------------
# index formula
# --------------------------------------------------------------------------

@dataclass
class IndexFormulaReport:
    signature: Signature
    block_signatures: list[Signature]
    block_edges: list[tuple[Edge, ...]]
    minus_sum: int
    plus_sum: int
    inconclusive: bool

    @property
    def minus_ok(self) -> bool:
        return self.signature.n_minus == self.minus_sum

    @property
    def plus_ok(self) -> bool:
        return self.signature.n_plus == self.plus_sum

    @property
    def holds(self) -> bool:
        return self.minus_ok and self.plus_ok


def verify_morse_bott(system: FormationSystem, p, collinearity_tol: float = COLLINEARITY_TOL,
                      zero_tol: float | None = None) -> IndexFormulaReport:
    """Compare the signature at ``p`` with the sums over the independent partition's blocks."""
    p = as_configuration(p, system.n)
    full = signature_of(hessian(system, p), zero_tol)
    part = independent_partition(system.graph, p, collinearity_tol)
    sigs = []
    for b in part.blocks:
        sub = block_subsystem(system, b)
        sigs.append(signature_of(hessian(sub, b.configuration), zero_tol))
    degenerate = full.n_zero > 3 or any(s.n_zero > 3 for s in sigs)
    return IndexFormulaReport(
        full,
        sigs,
        [b.edges for b in part.blocks],
        sum(s.n_minus for s in sigs),
        sum(s.n_plus for s in sigs),
        degenerate,
    )


# --------------------------------------------------------------------------
# reduction formula for line equilibria
# --------------------------------------------------------------------------

@dataclass
class ReductionReport:
    removed_vertex: int
    parents: tuple[int, int]
    between: bool  # removed agent lies between its two parents
    A: np.ndarray
    B: np.ndarray
    A_reduced: np.ndarray
    B_reduced: np.ndarray
    g_value: float
    g_slope: float
    sig_A: Signature
    sig_B: Signature
    sig_A_reduced: Signature
    sig_B_reduced: Signature
    sgn_A: tuple[int, int, int]
    sgn_B: tuple[int, int, int]
    reduced_is_equilibrium: bool
    eigen_residual_A: float
    eigen_residual_B: float
    congruence_offdiag_A: float
    congruence_offdiag_B: float
    notes: list[str] = field(default_factory=list)

    @property
    def A_ok(self) -> bool:
        return self.sig_A.as_tuple() == _add(self.sig_A_reduced.as_tuple(), self.sgn_A)

    @property
    def B_ok(self) -> bool:
        return self.sig_B.as_tuple() == _add(self.sig_B_reduced.as_tuple(), self.sgn_B)

    def congruence_ok(self, tol: float = 1e-7) -> bool:
        return self.congruence_offdiag_A <= tol and self.congruence_offdiag_B <= tol

    @property
    def holds(self) -> bool:
        return self.A_ok and self.B_ok


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def verify_reduction_formula(system: FormationSystem, p, zero_tol: float | None = None) -> ReductionReport:
    """Check the signature recursion obtained by deleting the last-added agent of a line equilibrium.

    The last vertex ``v`` of the construction, with parents ``j, k``, is
    removed; the edge ``(j, k)`` of the remaining system is modified so that
    its transverse coupling grows by ``g = f_vj (x_v - x_j) / (x_k - x_j)``
    (keeping ``j`` and ``k`` balanced) and its along-line coupling by
    ``A_vj A_vk / (A_vj + A_vk)``.  Both blocks then satisfy
    ``n(M_p) = n(M_p') + sgn(-M_vj - M_vk)``.
    """
    p = as_configuration(p, system.n)
    n = system.n
    if n < 3:
        raise ValueError("reduction needs at least three agents")
    if not is_line_configuration(p):
        raise ValueError("configuration is not a line configuration")
    q = align_to_x_axis(p)
    q[:, 1] = 0.0
    blocks = line_block_hessian(system, q)
    A, B = blocks.A, blocks.B
    last = system.graph.steps[-1]
    v = last.new_vertex
    j, k = last.parent_edge
    x = q[:, 0]
    xv, xj, xk = x[v - 1], x[j - 1], x[k - 1]
    between = (xv - xj) * (xv - xk) < 0
    notes = [] if between else ["removed agent lies outside its parents; mirrored construction used"]

    a_vj, a_vk = A[v - 1, j - 1], A[v - 1, k - 1]
    b_vj, b_vk = B[v - 1, j - 1], B[v - 1, k - 1]
    g_value = b_vj * (xv - xj) / (xk - xj)
    g_slope = a_vj * a_vk / (a_vj + a_vk)

    # reduced system on vertices 1..n-1 (v == n); edge (j, k) modified
    sub_graph = build_graph(system.graph.steps[:-1])
    sub_edges = sub_graph.edges
    _, d, f, df = system.edge_terms(q, derivative=True)
    idx = system.graph.edge_index
    f_sub = np.array([f[idx[e]] for e in sub_edges])
    s_sub = np.array([f[idx[e]] + d[idx[e]] * df[idx[e]] for e in sub_edges])
    jk = sub_graph.edge_index[edge_key(j, k)]
    f_sub[jk] += g_value
    s_sub[jk] += g_slope
    A_red = laplacian_from_weights(n - 1, sub_edges, s_sub)
    B_red = laplacian_from_weights(n - 1, sub_edges, f_sub)
    x_red = x[: n - 1]
    reduced_eq = bool(np.max(np.abs(B_red @ x_red)) <= 1e-8 * max(1.0, np.max(np.abs(x_red))))

    # congruence vectors: eigenvectors of the reduced blocks lifted by one entry
    keep = [i for i in range(n) if i != v - 1]
    eig_res = []
    offdiag = []
    for M, M_red, lift in (
        (A, A_red, lambda u: (a_vj * u[j - 1] + a_vk * u[k - 1]) / (a_vj + a_vk)),
        (B, B_red, lambda u: ((xk - xv) * u[j - 1] + (xv - xj) * u[k - 1]) / (xk - xj)),
    ):
        lam, vecs = np.linalg.eigh(M_red)
        Q = np.zeros((n, n))
        Q[v - 1, 0] = 1.0
        worst = 0.0
        for col in range(n - 1):
            u = vecs[:, col]
            star = np.zeros(n)
            star[keep] = u
            star[v - 1] = lift(u)
            Q[:, col + 1] = star
            target = np.zeros(n)
            target[keep] = lam[col] * u
            worst = max(worst, float(np.max(np.abs(M @ star - target))))
        eig_res.append(worst)
        C = Q.T @ M @ Q
        off = C - np.diag(np.diag(C))
        offdiag.append(float(np.max(np.abs(off)) / max(1.0, np.max(np.abs(np.diag(C))))))

    sig_A = signature_of(A, zero_tol)
    sig_B = signature_of(B, zero_tol)
    sig_Ar = signature_of(A_red, zero_tol)
    sig_Br = signature_of(B_red, zero_tol)
    return ReductionReport(
        removed_vertex=v, parents=(j, k), between=bool(between),
        A=A, B=B, A_reduced=A_red, B_reduced=B_red,
        g_value=float(g_value), g_slope=float(g_slope),
        sig_A=sig_A, sig_B=sig_B, sig_A_reduced=sig_Ar, sig_B_reduced=sig_Br,
        sgn_A=sign_vector(-a_vj - a_vk), sgn_B=sign_vector(-b_vj - b_vk),
        reduced_is_equilibrium=reduced_eq,
        eigen_residual_A=eig_res[0], eigen_residual_B=eig_res[1],
        congruence_offdiag_A=offdiag[0], congruence_offdiag_B=offdiag[1],
        notes=notes,
    )


# --------------------------------------------------------------------------
# target orbits
# --------------------------------------------------------------------------

@dataclass
class TargetOrbitCatalog:
    configurations: list[np.ndarray]
    sign_words: list[str]

    def __len__(self):
        return len(self.configurations)

    def nearest(self, p) -> tuple[int, float]:
        dists = [orbit_distance(p, c) for c in self.configurations]
        k = int(np.argmin(dists))
        return k, float(dists[k])


class TargetGeometryError(ValueError):
    pass


def place_vertex(xj, xk, dj: float, dk: float, side: int) -> np.ndarray:
    """Intersection of the circles of radius ``dj`` about ``xj`` and ``dk`` about ``xk``.

    ``side = +1`` picks the point left of the directed line ``xj -> xk``.
    """
    base = xk - xj
    L = float(np.hypot(*base))
    along = (dj * dj - dk * dk + L * L) / (2 * L)
    h2 = dj * dj - along * along
    if not h2 > 0:
        raise TargetGeometryError("circles do not meet in two points; triangle inequality fails")
    u = base / L
    normal = np.array([-u[1], u[0]])
    return xj + along * u + side * np.sqrt(h2) * normal


def realize_targets(graph: TriangulatedLamanGraph, targets: Mapping[Edge, float], word: str) -> np.ndarray:
    """The target configuration selected by a word over ``{+, -}`` of length ``N - 2``."""
    t = normalize_targets(graph, targets)
    p = np.zeros((graph.vertex_count, 2))
    p[1] = [t[(1, 2)], 0.0]
    for step, ch in zip(graph.steps, word):
        v = step.new_vertex
        j, k = step.parent_edge
        p[v - 1] = place_vertex(p[j - 1], p[k - 1], t[edge_key(j, v)], t[edge_key(k, v)],
                                1 if ch == "+" else -1)
    return p


def enumerate_target_orbits(graph: TriangulatedLamanGraph, targets: Mapping[Edge, float],
                            same_orbit_tol: float = 1e-9) -> TargetOrbitCatalog:
    bad = validate_targets(graph, targets)
    if bad:
        raise TargetGeometryError(f"targets violate the triangle inequalities on {bad}")
    configs, words = [], []
    for letters in itertools.product("+-", repeat=graph.vertex_count - 2):
        word = "".join(letters)
        c = canonicalize(realize_targets(graph, targets, word))
        if any(orbit_distance(c, other) <= same_orbit_tol for other in configs):
            continue
        configs.append(c)
        words.append(word)
    return TargetOrbitCatalog(configs, words)


# --------------------------------------------------------------------------
# Monte Carlo basins
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Sampler:
    box_factor: float = 4.0
    min_separation: float = 1e-3


@dataclass
class TrialOutcome:
    index: int
    status: str  # "target", "non-target" or "failure"
    orbit: int | None
    configuration: np.ndarray | None
    residual: float
    max_distance_error: float
    detail: str = ""


@dataclass
class BasinReport:
    trials: int
    seed: int
    hits: dict[int, int]
    non_target: int
    failures: int
    outcomes: list[TrialOutcome]

    @property
    def target_fraction(self) -> float:
        return sum(self.hits.values()) / self.trials


def sample_initial(system: FormationSystem, rng: np.random.Generator, sampler: Sampler = Sampler()) -> np.ndarray:
    side = sampler.box_factor * max(law.target for law in system.laws.values())
    while True:
        p = rng.uniform(-side / 2, side / 2, size=(system.n, 2))
        if np.min(edge_lengths(system.graph, p)) >= sampler.min_separation:
            return p


def trial_streams(seed: int, trials: int) -> list[np.random.Generator]:
    """Independent counter-based streams, one per trial index."""
    children = np.random.SeedSequence(seed).spawn(trials)
    return [np.random.Generator(np.random.Philox(c)) for c in children]


def run_trial(system: FormationSystem, catalog: TargetOrbitCatalog, index: int,
              rng: np.random.Generator, sampler: Sampler = Sampler(),
              controls: Controls = Controls()) -> TrialOutcome:
    p0 = sample_initial(system, rng, sampler)
    try:
        traj = integrate(system, p0, controls=controls)
    except IntegrationError as exc:
        return TrialOutcome(index, "failure", None, None, np.inf, np.inf, str(exc))
    if not traj.converged:
        return TrialOutcome(index, "failure", None, traj.final, residual(system, traj.final),
                            np.inf, "horizon reached before equilibrium")
    rec = refine_equilibrium(system, traj.final)
    if not rec.converged:
        return TrialOutcome(index, "failure", None, traj.final, rec.residual, np.inf, "refinement failed")
    q = rec.configuration
    targets = np.array([system.laws[e].target for e in system.graph.edges])
    err = float(np.max(np.abs(edge_lengths(system.graph, q) - targets)))
    k, dist = catalog.nearest(q)
    if dist < ORBIT_RADIUS:
        return TrialOutcome(index, "target", k, q, rec.residual, err)
    return TrialOutcome(index, "non-target", None, q, rec.residual, err)


def _run_chunk(args):
    system, catalog, seed, trials, indices, sampler, controls = args
    streams = trial_streams(seed, trials)
    return [run_trial(system, catalog, i, streams[i], sampler, controls) for i in indices]


def basin_monte_carlo(system: FormationSystem, trials: int, seed: int = 0,
                      sampler: Sampler = Sampler(), controls: Controls = Controls(),
                      catalog: TargetOrbitCatalog | None = None, workers: int = 1) -> BasinReport:
    """Integrate from random starts and tally which target orbit each run reaches.

    Trial ``i`` always draws from the ``i``-th spawned stream of ``seed``, so
    the report does not depend on ``workers``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if catalog is None:
        catalog = enumerate_target_orbits(system.graph, system.targets)
    if workers <= 1:
        outcomes = _run_chunk((system, catalog, seed, trials, range(trials), sampler, controls))
    else:
        chunks = [range(w, trials, workers) for w in range(workers)]
        with ProcessPoolExecutor(workers) as pool:
            parts = pool.map(_run_chunk, [(system, catalog, seed, trials, c, sampler, controls)
                                          for c in chunks])
            outcomes = sorted((o for part in parts for o in part), key=lambda o: o.index)
    hits = Counter(o.orbit for o in outcomes if o.status == "target")
    return BasinReport(
        trials=trials,
        seed=seed,
        hits={k: hits.get(k, 0) for k in range(len(catalog))},
        non_target=sum(o.status == "non-target" for o in outcomes),
        failures=sum(o.status == "failure" for o in outcomes),
        outcomes=list(outcomes),
    )


# --------------------------------------------------------------------------
# census
# --------------------------------------------------------------------------

@dataclass
class StabilityCensus:
    counts: dict[tuple[bool, str], int]
    rows: list[tuple[bool, str, Signature]]

    @property
    def consistent(self) -> bool:
        """No stable orbit that is not strongly rigid and no strongly rigid orbit that is unstable."""
        return not any(
            (rigid and kind != OrbitType.STABLE.value) or (not rigid and kind == OrbitType.STABLE.value)
            for (rigid, kind), c in self.counts.items() if c
        )


def stability_census(system: FormationSystem, equilibria: Sequence,
                     collinearity_tol: float = COLLINEARITY_TOL) -> StabilityCensus:
    counts: Counter = Counter()
    rows = []
    for p in equilibria:
        p = getattr(p, "configuration", p)
        rigid = is_strongly_rigid(system.graph, p, collinearity_tol)
        c = classify_orbit(system, p)
        counts[(rigid, c.kind.value)] += 1
        rows.append((rigid, c.kind.value, c.signature))
    return StabilityCensus(dict(counts), rows)
