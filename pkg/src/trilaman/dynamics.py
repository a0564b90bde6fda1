"""Trajectories of the gradient flow and high-accuracy equilibria."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import RK45
from scipy.optimize import brentq

from .geometry import DomainError, GaugeError, as_configuration, canonical_gauge, se2_apply
from .spectral import laplacian_from_weights, potential_hessian
from .system import FormationSystem, gradient, potential, residual, vector_field

__all__ = [
    "Controls",
    "Trajectory",
    "EquilibriumRecord",
    "IntegrationError",
    "integrate",
    "refine_equilibrium",
    "find_line_equilibria",
    "line_orderings",
    "potential",
    "vector_field",
    "gradient",
    "residual",
]

REFINE_TOL = 1e-10


@dataclass(frozen=True)
class Controls:
    horizon: float = 200.0
    sample_interval: float = 0.5
    rtol: float = 1e-8
    atol: float = 1e-10
    equilibrium_tol: float = 1e-7


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (T, N, 2)
    potentials: np.ndarray
    residuals: np.ndarray
    converged: bool
    min_edge_length: float

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def rows(self) -> np.ndarray:
        """``(t, x1, y1, ..., xN, yN, Phi, |grad Phi|_inf)`` per snapshot."""
        flat = self.states.reshape(len(self.times), -1)
        return np.column_stack([self.times, flat, self.potentials, self.residuals])


class IntegrationError(RuntimeError):
    def __init__(self, message: str, trajectory: Trajectory | None = None):
        super().__init__(message)
        self.trajectory = trajectory


def _make_trajectory(system, ts, ys, converged, min_len):
    states = np.asarray(ys).reshape(len(ts), system.n, 2)
    pots = np.array([potential(system, s) for s in states])
    res = np.array([residual(system, s) for s in states])
    return Trajectory(np.asarray(ts, dtype=float), states, pots, res, converged, min_len)


def integrate(system: FormationSystem, p0, horizon: float | None = None,
              controls: Controls = Controls()) -> Trajectory:
    """Integrate the flow from ``p0`` with an adaptive Dormand-Prince 5(4) pair.

    Stops early once ``|grad Phi|_inf`` drops below ``controls.equilibrium_tol``.
    Snapshots are taken every ``controls.sample_interval`` plus the final state.
    """
    p0 = as_configuration(p0, system.n).copy()
    horizon = controls.horizon if horizon is None else horizon
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    tol = controls.equilibrium_tol
    if residual(system, p0) < tol:
        return _make_trajectory(system, [0.0], [p0.ravel()], True,
                                float(np.min(system.edge_terms(p0)[1])))

    inc = system._incidence
    groups = system._groups
    n = system.n
    min_len = [np.inf]

    def rhs(t, y):
        p = y.reshape(n, 2)
        diff = inc @ p
        d = np.sqrt(diff[:, 0] ** 2 + diff[:, 1] ** 2)
        f = np.empty_like(d)
        for g in groups:
            f[g.rows] = g.family.f(d[g.rows], g.targets)
        dm = d.min()
        if dm < min_len[0]:
            min_len[0] = dm
        return -(inc.T @ (f[:, None] * diff)).ravel()

    def excess(y):
        return float(np.max(np.abs(rhs(0.0, y)))) - tol

    t_eval = np.arange(0.0, horizon, controls.sample_interval)
    if t_eval[-1] < horizon:
        t_eval = np.append(t_eval, horizon)
    ts, ys = [0.0], [p0.ravel()]
    nxt = 1
    converged = False
    error = None
    # step the Dormand-Prince pair by hand so a failure keeps the samples taken so far
    with np.errstate(divide="raise", invalid="raise", over="raise"):
        try:
            solver = RK45(rhs, 0.0, p0.ravel(), horizon, rtol=controls.rtol, atol=controls.atol)
            while solver.status == "running":
                msg = solver.step()
                if solver.status == "failed":
                    error = msg
                    break
                dense = solver.dense_output()
                t_stop = solver.t
                if excess(solver.y) < 0:
                    t_stop = brentq(lambda t: excess(dense(t)), solver.t_old, solver.t, xtol=1e-12)
                    converged = True
                while nxt < len(t_eval) and t_eval[nxt] <= t_stop:
                    ts.append(float(t_eval[nxt]))
                    ys.append(dense(t_eval[nxt]))
                    nxt += 1
                if converged:
                    if ts[-1] < t_stop:
                        ts.append(float(t_stop))
                        ys.append(dense(t_stop))
                    break
        except FloatingPointError as exc:
            error = f"collision or overflow near t={ts[-1]:.6g}: {exc}"

    if error is not None:
        try:
            with np.errstate(all="ignore"):
                traj = _make_trajectory(system, ts, ys, False, float(min_len[0]))
        except (DomainError, FloatingPointError, ValueError):
            traj = None
        raise IntegrationError(f"integration failed: {error}", traj)
    return _make_trajectory(system, ts, ys, converged, float(min_len[0]))


@dataclass
class EquilibriumRecord:
    configuration: np.ndarray
    residual: float
    method: str
    converged: bool = True
    iterations: int = 0
    notes: list = field(default_factory=list)


_PINNED = (0, 1, 3)  # x1, y1, y2 after placing agent 2 on the x-axis


def refine_equilibrium(system: FormationSystem, p_near, tol: float = REFINE_TOL,
                       max_iter: int = 50) -> EquilibriumRecord:
    """Sharpen an approximate equilibrium by gauge-fixed Newton iteration.

    The three rigid-motion directions are removed by moving agent 1 to the
    origin and agent 2 onto the x-axis, then freezing ``x1, y1, y2``.  The
    result is mapped back to the frame of ``p_near``.  On failure the input is
    returned with ``converged=False``.
    """
    p_near = as_configuration(p_near, system.n)
    r0 = residual(system, p_near)
    if r0 <= tol:
        return EquilibriumRecord(p_near.copy(), r0, "none")
    try:
        gauge = canonical_gauge(p_near)
    except GaugeError:
        return EquilibriumRecord(p_near.copy(), r0, "newton", False, notes=["agents 1 and 2 coincide"])
    q = se2_apply(gauge, p_near)
    free = np.setdiff1d(np.arange(2 * system.n), _PINNED)

    r = residual(system, q)
    it = 0
    try:
        for it in range(1, max_iter + 1):
            g = gradient(system, q).ravel()
            jac = potential_hessian(system, q)[np.ix_(free, free)]
            try:
                step = np.linalg.solve(jac, -g[free])
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(jac, -g[free], rcond=None)[0]
            norm0 = np.linalg.norm(g)
            alpha = 1.0
            while alpha > 1e-6:
                trial = q.ravel().copy()
                trial[free] += alpha * step
                trial = trial.reshape(-1, 2)
                try:
                    gt = gradient(system, trial).ravel()
                except DomainError:
                    alpha *= 0.5
                    continue
                if np.linalg.norm(gt) < norm0:
                    break
                alpha *= 0.5
            else:
                break
            q = trial
            r = residual(system, q)
            if r <= tol:
                break
    except (DomainError, FloatingPointError):
        r = np.inf

    if not r <= tol:
        return EquilibriumRecord(p_near.copy(), r0, "newton", False, it,
                                 notes=[f"newton stalled at residual {r:.3e}"])
    out = se2_apply(gauge.inverse(), q)
    return EquilibriumRecord(out, residual(system, out), "newton", True, it)


def line_orderings(n: int):
    """Left-to-right agent orders on a line, one per reversal pair."""
    for perm in itertools.permutations(range(1, n + 1)):
        if perm[0] < perm[-1] or n == 1:
            yield perm


def find_line_equilibria(system: FormationSystem, ordering, tol: float = REFINE_TOL,
                         scales=(0.25, 0.5, 1.0, 2.0, 4.0)) -> list[EquilibriumRecord]:
    """Equilibria with every agent on the x-axis in the given left-to-right order.

    The one-dimensional potential is strictly convex in the gaps between
    consecutive agents, so damped Newton from equispaced starts either finds
    the unique balanced arrangement or drives a gap to zero.
    """
    order = [int(v) for v in ordering]
    n = system.n
    if sorted(order) != list(range(1, n + 1)):
        raise ValueError("ordering must be a permutation of the agents")
    base = float(np.mean([law.target for law in system.laws.values()]))
    found: list[np.ndarray] = []
    for s in scales:
        gaps = _line_newton(system, order, np.full(n - 1, s * base))
        if gaps is None:
            continue
        if any(np.max(np.abs(gaps - g)) <= 1e-8 * base for g in found):
            continue
        found.append(gaps)

    records = []
    for gaps in found:
        p = np.zeros((n, 2))
        pos = np.concatenate([[0.0], np.cumsum(gaps)])
        for v, x in zip(order, pos):
            p[v - 1, 0] = x
        rec = refine_equilibrium(system, p, tol)
        rec.method = "line-newton"
        if rec.converged:
            records.append(rec)
    return records


def _line_newton(system, order, gaps, max_iter=200):
    n = system.n
    edges = system.graph.edges
    i_idx, j_idx = system.graph.edge_arrays()
    perm = np.asarray(order) - 1
    lower = np.tril(np.ones((n, n - 1)), -1)  # positions along the order from gaps
    scale = float(np.sum(gaps))

    def evaluate(g):
        a = np.empty(n)
        a[perm] = lower @ g
        d = np.abs(a[i_idx] - a[j_idx])
        if np.any(d <= 0):
            return None
        energy = float(np.sum(system.law_values(d, "potential")))
        f = system.law_values(d, "f")
        slope = system.law_values(d, "slope")
        # 1-D potential: gradient -(B a), Hessian -A in agent coordinates
        grad_a = -(laplacian_from_weights(n, edges, f) @ a)
        hess_a = -laplacian_from_weights(n, edges, slope)
        grad_g = lower.T @ grad_a[perm]
        hess_g = lower.T @ hess_a[np.ix_(perm, perm)] @ lower
        return energy, grad_a, grad_g, hess_g

    state = evaluate(gaps)
    if state is None:
        return None
    for _ in range(max_iter):
        energy, grad_a, grad_g, hess_g = state
        if np.max(np.abs(grad_a)) <= 1e-11 * max(1.0, scale):
            return gaps
        try:
            step = np.linalg.solve(hess_g, -grad_g)
        except np.linalg.LinAlgError:
            step = -grad_g
        if grad_g @ step >= 0:
            step = -grad_g
        if np.max(np.abs(step)) <= 1e-12 * scale:
            break
        # stay inside the ordering chamber
        neg = step < 0
        alpha = 1.0
        if np.any(neg):
            alpha = min(1.0, 0.9 * float(np.min(-gaps[neg] / step[neg])))
        accepted = False
        while alpha > 1e-14:
            trial = gaps + alpha * step
            new = evaluate(trial)
            if new is not None and (new[0] <= energy + 1e-4 * alpha * (grad_g @ step)
                                    or np.max(np.abs(new[1])) < 0.5 * np.max(np.abs(grad_a))):
                gaps, state, accepted = trial, new, True
                break
            alpha *= 0.5
        if not accepted:
            break
        scale = float(np.sum(gaps))
        if np.min(gaps) < 1e-9 * scale:
            return None
    _, grad_a, _, _ = state
    if np.max(np.abs(grad_a)) <= 1e-9 * max(1.0, scale):
        return gaps
    return None
