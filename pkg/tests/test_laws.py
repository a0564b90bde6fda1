import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from trilaman.laws import (
    AFFINE,
    FAMILIES,
    SCALED,
    STANDARD,
    LawDomainError,
    LawFamily,
    check_C1,
    check_C2,
    law_from_name,
    standard_law,
    validate_law,
)

targets = st.floats(0.2, 5.0)


def test_standard_closed_forms():
    law = standard_law(1.0)
    assert law.f(1.0) == 0.0
    assert law.f(2.0) == pytest.approx(0.75)
    assert law.df(1.0) == pytest.approx(2.0)
    assert law.edge_potential(1.0) == pytest.approx(0.0)


def test_quadrature_oracle():
    # integral of t f(t) from 1 to 2 with target 1
    law = standard_law(1.0)
    assert law.edge_potential(2.0) == pytest.approx(1.5 - np.log(2), abs=1e-12)
    assert law.edge_potential(2.0) == pytest.approx(0.806853, abs=1e-6)


@pytest.mark.parametrize("family", [STANDARD, SCALED, AFFINE])
@given(target=targets, d=st.floats(0.05, 8.0))
@settings(max_examples=25, deadline=None)
def test_potential_matches_quadrature(family, target, d):
    law = family(target)
    ref, _ = quad(lambda t: t * float(law.f(t)), 1.0, d, epsabs=1e-12, epsrel=1e-12)
    assert law.edge_potential(d) == pytest.approx(ref, rel=1e-8, abs=1e-9)


def test_quadrature_fallback_family():
    fam = LawFamily("cubic", lambda d, t: d**3 - t**3, lambda d, t: 3 * d**2)
    law = fam(1.2)
    assert not law.has_closed_form
    ref, _ = quad(lambda t: t * (t**3 - 1.2**3), 1.0, 2.5)
    assert law.edge_potential(2.5) == pytest.approx(ref, rel=1e-9)
    np.testing.assert_allclose(law.edge_potential(np.array([0.5, 2.5]))[1], ref, rtol=1e-9)


@pytest.mark.parametrize("family", [STANDARD, SCALED, AFFINE])
@given(target=targets, d=st.floats(0.1, 6.0))
@settings(max_examples=25, deadline=None)
def test_derivative_consistent(family, target, d):
    law = family(target)
    h = 1e-6 * d
    fd = (law.f(d + h) - law.f(d - h)) / (2 * h)
    assert law.df(d) == pytest.approx(fd, rel=1e-6, abs=1e-8)
    assert law.slope(d) == pytest.approx(law.f(d) + d * law.df(d))


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_non_positive_target(bad):
    with pytest.raises(LawDomainError):
        standard_law(bad)


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_law_from_name(name):
    assert law_from_name(name, 1.0).family.name == name


def test_unknown_family():
    with pytest.raises(LawDomainError, match="unknown law family"):
        law_from_name("nope", 1.0)


@pytest.mark.parametrize("family", [STANDARD, SCALED])
@given(target=targets)
@settings(max_examples=10, deadline=None)
def test_C1_holds(family, target):
    rep = check_C1(family(target))
    assert rep.c1_ok and rep.zero_crossings == 1 and not rep.flagged


def test_C1_affine_flags_small_distances():
    rep = check_C1(AFFINE(1.0))
    assert not rep.c1_ok
    assert rep.flagged and max(rep.flagged) < 0.5


def test_C1_two_zeros_rejected():
    fam = LawFamily("wavy", lambda d, t: (d - t) * (d - 2 * t), lambda d, t: 2 * d - 3 * t)
    rep = check_C1(fam(1.0))
    assert rep.zero_crossings == 2 and not rep.c1_ok


def test_C1_grid_validation():
    with pytest.raises(ValueError):
        check_C1(standard_law(1.0), [1.0, 0.5])


@pytest.mark.parametrize("family, expected", [(STANDARD, True), (SCALED, True), (AFFINE, False)])
def test_C2_verdicts(family, expected):
    assert check_C2(family(1.0)).verdict is expected


def test_C2_probe_validation():
    with pytest.raises(ValueError):
        check_C2(standard_law(1.0), [0.1])
    with pytest.raises(ValueError):
        check_C2(standard_law(1.0), [0.01, 0.1])


def test_validate_law():
    assert validate_law(standard_law(1.3)).valid
    assert not validate_law(AFFINE(1.3)).valid
