"""Pairwise interaction laws ``f(d) = u(d, target)`` and checks of the admissibility conditions.

A law family supplies vectorized ``f(d, target)``, its derivative in ``d`` and,
when known, the edge potential ``P(d) = int_1^d t f(t) dt``.  Families without
a closed-form potential fall back on adaptive quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate


class LawDomainError(ValueError):
    pass


@dataclass(frozen=True)
class LawFamily:
    name: str
    f: Callable
    df: Callable
    potential: Callable | None = None

    def __call__(self, target: float) -> "InteractionLaw":
        if not target > 0:
            raise LawDomainError(f"target distance must be positive, got {target}")
        return InteractionLaw(self, float(target))


@dataclass(frozen=True)
class InteractionLaw:
    family: LawFamily
    target: float

    def f(self, d):
        return self.family.f(d, self.target)

    def df(self, d):
        return self.family.df(d, self.target)

    def slope(self, d):
        """``(x f(x))'`` at ``d``: the derivative of the actual pair force."""
        return self.family.f(d, self.target) + d * self.family.df(d, self.target)

    def edge_potential(self, d):
        if self.family.potential is not None:
            return self.family.potential(d, self.target)
        return _quad_potential(self, d)

    @property
    def has_closed_form(self) -> bool:
        return self.family.potential is not None


def _quad_potential(law: InteractionLaw, d):
    def one(x):
        val, _ = integrate.quad(
            lambda t: t * law.f(t), 1.0, x, epsabs=1e-10, epsrel=1e-10, limit=200
        )
        return val

    d = np.asarray(d, dtype=float)
    if d.ndim == 0:
        return one(float(d))
    return np.array([one(x) for x in d.ravel()]).reshape(d.shape)


# f(d) = (d^2 - t^2) / d^2
def _std_f(d, t):
    return 1.0 - (t * t) / (d * d)


def _std_df(d, t):
    return 2.0 * t * t / (d * d * d)


def _std_potential(d, t):
    return 0.5 * (d * d - 1.0) - t * t * np.log(d)


# f(d) = (d^2 - t^2) / d^3
def _scaled_f(d, t):
    return (d * d - t * t) / (d * d * d)


def _scaled_df(d, t):
    return -1.0 / (d * d) + 3.0 * t * t / d**4


def _scaled_potential(d, t):
    return (d - 1.0) + t * t * (1.0 / d - 1.0)


# f(d) = d - t: unique zero and increasing, but no collision barrier
def _affine_f(d, t):
    return d - t


def _affine_df(d, t):
    return np.ones_like(np.asarray(d, dtype=float))


def _affine_potential(d, t):
    return (d**3 - 1.0) / 3.0 - t * (d * d - 1.0) / 2.0


STANDARD = LawFamily("standard", _std_f, _std_df, _std_potential)
SCALED = LawFamily("scaled", _scaled_f, _scaled_df, _scaled_potential)
AFFINE = LawFamily("affine", _affine_f, _affine_df, _affine_potential)

FAMILIES: dict[str, LawFamily] = {fam.name: fam for fam in (STANDARD, SCALED, AFFINE)}


def standard_law(target: float) -> InteractionLaw:
    """The law ``f(d) = (d^2 - target^2) / d^2``."""
    return STANDARD(target)


def law_from_name(name: str, target: float) -> InteractionLaw:
    try:
        family = FAMILIES[name]
    except KeyError:
        raise LawDomainError(
            f"unknown law family {name!r}; known: {sorted(FAMILIES)}"
        ) from None
    return family(target)


@dataclass
class LawValidationReport:
    c1_ok: bool
    sampled_points: list[tuple[float, float]]
    zero_crossings: int
    flagged: list[float] = field(default_factory=list)
    c2_trend_ok: bool | None = None

    @property
    def valid(self) -> bool:
        return self.c1_ok and bool(self.c2_trend_ok)


def default_grid(target: float, n: int = 400) -> np.ndarray:
    return np.geomspace(target / 10.0, 10.0 * target, n)


def check_C1(law: InteractionLaw, grid: Sequence[float] | None = None) -> LawValidationReport:
    """Sample ``(x f(x))'`` on a grid and count sign changes of ``f``.

    Passes when every sampled derivative is positive and ``f`` changes sign
    exactly once.  Grid points with a non-positive derivative are listed in
    ``flagged``.
    """
    x = default_grid(law.target) if grid is None else np.asarray(grid, dtype=float)
    if np.any(x <= 0) or np.any(np.diff(x) <= 0):
        raise ValueError("grid must be strictly positive and strictly increasing")
    slope = np.asarray(law.slope(x), dtype=float)
    fx = np.asarray(law.f(x), dtype=float)
    signs = np.sign(fx)
    signs = signs[signs != 0]
    crossings = int(np.count_nonzero(np.diff(signs)))
    flagged = [float(v) for v in x[slope <= 0]]
    return LawValidationReport(
        c1_ok=not flagged and crossings == 1,
        sampled_points=[(float(a), float(b)) for a, b in zip(x, slope)],
        zero_crossings=crossings,
        flagged=flagged,
    )


@dataclass
class C2Probe:
    verdict: bool
    probe: list[float]
    tail_integrals: list[float]


def check_C2(law: InteractionLaw, probe: Sequence[float] | None = None,
             decay_tol: float = 1e-2) -> C2Probe:
    """Probe ``int_x^1 t f(t) dt -> -inf`` as ``x -> 0`` along a decreasing sequence.

    The verdict is true when the sampled integrals strictly decrease and the
    last decrement has not decayed below ``decay_tol`` times the first one.  A
    convergent integral shows geometrically vanishing decrements on a
    geometric probe, a divergent one does not.
    """
    xs = (np.geomspace(1e-1, 1e-8, 8) * law.target if probe is None
          else np.asarray(probe, dtype=float))
    if xs.size < 2:
        raise ValueError("C2 probe needs at least two points")
    if np.any(xs <= 0) or np.any(np.diff(xs) >= 0):
        raise ValueError("C2 probe must be strictly decreasing and positive")
    tails = -np.asarray(law.edge_potential(xs), dtype=float)
    drops = tails[:-1] - tails[1:]
    verdict = bool(np.all(drops > 0) and drops[-1] >= decay_tol * drops[0])
    return C2Probe(verdict, [float(v) for v in xs], [float(v) for v in tails])


def validate_law(law: InteractionLaw) -> LawValidationReport:
    report = check_C1(law)
    report.c2_trend_ok = check_C2(law).verdict
    return report
