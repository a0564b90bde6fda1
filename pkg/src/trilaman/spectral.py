"""Hessians, signatures and stability of critical orbits.

Sign convention: :func:`hessian` returns the linearization of the flow,
``-grad^2 Phi``, so an exponentially stable orbit of ``N`` agents has
signature ``(n_plus, n_minus, n_zero) = (0, 2N - 3, 3)``.  The Hessian of the
potential itself is :func:`potential_hessian`.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .geometry import as_configuration, interleaved_to_split
from .system import FormationSystem


@dataclass(frozen=True)
class Signature:
    n_plus: int
    n_minus: int
    n_zero: int
    zero_tol: float

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.n_plus, self.n_minus, self.n_zero)

    def __add__(self, other):
        a, b, c = other if isinstance(other, tuple) else other.as_tuple()
        return Signature(self.n_plus + a, self.n_minus + b, self.n_zero + c, self.zero_tol)

    def __str__(self):
        return f"({self.n_plus}, {self.n_minus}, {self.n_zero})"


def default_zero_tol(eigenvalues) -> float:
    ev = np.asarray(eigenvalues)
    scale = float(np.max(np.abs(ev))) if ev.size else 0.0
    return 1e-6 * max(1.0, scale)


def signature_of(matrix, zero_tol: float | None = None) -> Signature:
    m = np.asarray(matrix, dtype=float)
    ev = np.linalg.eigvalsh(m) if m.size else np.zeros(0)
    return signature_from_eigenvalues(ev, zero_tol)


def signature_from_eigenvalues(ev, zero_tol: float | None = None) -> Signature:
    ev = np.asarray(ev, dtype=float)
    tol = default_zero_tol(ev) if zero_tol is None else float(zero_tol)
    return Signature(
        int(np.count_nonzero(ev > tol)),
        int(np.count_nonzero(ev < -tol)),
        int(np.count_nonzero(np.abs(ev) <= tol)),
        tol,
    )


def sign_vector(x: float, zero_tol: float = 0.0) -> tuple[int, int, int]:
    """``(1,0,0)``, ``(0,1,0)`` or ``(0,0,1)`` for positive, negative or zero ``x``."""
    if x > zero_tol:
        return (1, 0, 0)
    if x < -zero_tol:
        return (0, 1, 0)
    return (0, 0, 1)


def potential_hessian(system: FormationSystem, p) -> np.ndarray:
    """``grad^2 Phi`` in interleaved coordinates.

    Each edge contributes the 2x2 block ``K = f I + (f'/d) u u^T`` with
    ``u = x_i - x_j``, added to the ``(i, i)`` and ``(j, j)`` blocks and
    subtracted from the ``(i, j)`` and ``(j, i)`` blocks.
    """
    diff, d, f, df = system.edge_terms(p, derivative=True)
    n = system.n
    h = np.zeros((n, 2, n, 2))
    k = f[:, None, None] * np.eye(2) + (df / d)[:, None, None] * np.einsum("ei,ej->eij", diff, diff)
    i, j = system.graph.edge_arrays()
    for e in range(len(d)):
        a, b = i[e], j[e]
        h[a, :, a, :] += k[e]
        h[b, :, b, :] += k[e]
        h[a, :, b, :] -= k[e]
        h[b, :, a, :] -= k[e]
    return h.reshape(2 * n, 2 * n)


def hessian(system: FormationSystem, p) -> np.ndarray:
    """The flow linearization ``-grad^2 Phi`` (stable orbits are negative semidefinite)."""
    return -potential_hessian(system, p)


@dataclass(frozen=True)
class LineBlockHessian:
    A: np.ndarray
    B: np.ndarray

    def assembled(self) -> np.ndarray:
        n = self.A.shape[0]
        out = np.zeros((2 * n, 2 * n))
        out[:n, :n] = self.A
        out[n:, n:] = self.B
        return out


def laplacian_from_weights(n: int, edges, weights) -> np.ndarray:
    """Symmetric zero-row-sum matrix with off-diagonal entry ``w`` on each edge (1-based)."""
    m = np.zeros((n, n))
    for (a, b), w in zip(edges, weights):
        m[a - 1, b - 1] += w
        m[b - 1, a - 1] += w
    m[np.diag_indices(n)] = -m.sum(axis=1)
    return m


def line_block_hessian(system: FormationSystem, p, align_tol: float = 1e-9) -> LineBlockHessian:
    """The ``(A, B)`` blocks of the flow linearization at a configuration on the x-axis.

    ``A`` carries the along-line couplings ``(x f)'(d)`` and ``B`` the
    transverse couplings ``f(d)``.
    """
    p = as_configuration(p, system.n)
    scale = max(1.0, float(np.max(np.abs(p[:, 0]))))
    if np.max(np.abs(p[:, 1])) > align_tol * scale:
        raise ValueError("configuration is not aligned with the x-axis")
    _, d, f, df = system.edge_terms(p, derivative=True)
    slope = f + d * df
    edges = system.graph.edges
    return LineBlockHessian(
        laplacian_from_weights(system.n, edges, slope),
        laplacian_from_weights(system.n, edges, f),
    )


def split_coordinates(matrix: np.ndarray) -> np.ndarray:
    """Reorder a ``2N x 2N`` interleaved matrix into ``(x..., y...)`` order."""
    perm = interleaved_to_split(matrix.shape[0] // 2)
    return matrix[np.ix_(perm, perm)]


def rigid_motion_null_vectors(p) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Translations along x and y and the infinitesimal rotation, in split coordinates."""
    p = as_configuration(p)
    n = len(p)
    e = np.ones(n)
    z = np.zeros(n)
    return (
        np.concatenate([e, z]),
        np.concatenate([z, e]),
        np.concatenate([z, p[:, 0]]),
    )


class OrbitType(str, Enum):
    STABLE = "stable"
    SADDLE = "unstable-saddle"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class OrbitClassification:
    kind: OrbitType
    signature: Signature
    eigenvalues: np.ndarray

    @property
    def index(self) -> int:
        return self.signature.n_minus

    @property
    def coindex(self) -> int:
        return self.signature.n_plus


def classify_orbit(system: FormationSystem, p, zero_tol: float | None = None) -> OrbitClassification:
    ev = np.linalg.eigvalsh(hessian(system, p))
    sig = signature_from_eigenvalues(ev, zero_tol)
    n = system.n
    if sig.n_zero > 3:
        kind = OrbitType.DEGENERATE
    elif sig.n_zero < 3:
        raise ValueError(
            f"Hessian has only {sig.n_zero} zero eigenvalues; not a critical orbit"
        )
    elif sig.as_tuple() == (0, 2 * n - 3, 3):
        kind = OrbitType.STABLE
    else:
        kind = OrbitType.SADDLE
    return OrbitClassification(kind, sig, ev)
