"""Angular barrier functions, their Cartesian forms and defining ODEs."""
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from superint import TTW, V1, V2, GenSW, eval_F1, eval_F2, f_ode_solve, potential_from_dict
from superint.errors import DomainError, SingularityError
from superint.potentials import (
    as_rational,
    closed_form_k_a,
    f1_cartesian,
    f2_cartesian,
    is_confining,
    ode_residual,
    ttw_angular,
    ttw_tilde_angular,
)


@pytest.mark.parametrize("k", [1, 2, 3, "3/2", 4])
def test_f1_at_wedge_centre_is_k_a(k):
    kf = float(Fraction(k))
    assert eval_F1(math.pi / (2 * kf), k, 1.7, 0.4) == pytest.approx(1.7, abs=1e-15)


def test_f1_example():
    assert eval_F1(math.pi / 4, 2, 1.0, 0.0) == pytest.approx(1.0)


def test_f2_at_zero_is_k_a():
    assert eval_F2(0.0, 3, 1.3, 0.7) == 1.3


def test_singular_rays():
    with pytest.raises(SingularityError):
        eval_F1(0.0, 2, 1, 0)
    with pytest.raises(SingularityError):
        eval_F2(math.pi / 6, 3, 1, 0)
    with pytest.raises(SingularityError):
        ttw_angular(math.pi / 2, 1, 1, 1)


def test_cartesian_list_example():
    assert f1_cartesian(2, 1.0, 1.0, 1.3, 0.4) == pytest.approx(1.3 / 2)
    assert f2_cartesian(1, 1.0, 0.0, 1.3, 0.4) == pytest.approx(1.3)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
@pytest.mark.parametrize("family", ["F1", "F2"])
def test_cartesian_matches_polar_over_r2(family, k):
    rng = np.random.default_rng(k)
    pot = (V1 if family == "F1" else V2)(k=k, k_a=1.0, k_b=0.4)
    lo, hi = pot.wedge
    phi = rng.uniform(lo + 0.02 * (hi - lo), hi - 0.02 * (hi - lo), 200)
    r = rng.uniform(0.5, 2, 200)
    x, y = r * np.cos(phi), r * np.sin(phi)
    cart = (f1_cartesian if family == "F1" else f2_cartesian)(k, x, y, 1.0, 0.4)
    polar = (eval_F1 if family == "F1" else eval_F2)(phi, k, 1.0, 0.4) / r**2
    assert np.max(np.abs(cart - polar) / np.maximum(1, np.abs(polar))) < 1e-12


def test_ttw_symmetric_point():
    for k in (1, 2, Fraction(3, 2)):
        assert ttw_angular(math.pi / (4 * float(k)), k, 1, 1) == pytest.approx(4.0)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 8), st.integers(1, 3), st.floats(0.1, 3), st.floats(0.1, 3), st.floats(0.02, 0.98))
def test_ttw_parameter_map(p, q, a, b, u):
    k = Fraction(p, q)
    phi = u * math.pi / (2 * float(k))
    lhs = eval_F1(phi, 2 * k, 2 * (a + b), 2 * (b - a))
    assert lhs == pytest.approx(ttw_angular(phi, k, a, b), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 8), st.integers(1, 3), st.floats(0.1, 3), st.floats(0.1, 3), st.floats(-0.98, 0.98))
def test_ttw_tilde_same_k(p, q, a, b, u):
    k = Fraction(p, q)
    phi = u * math.pi / (2 * float(k))
    assert eval_F2(phi, k, 2 * (a + b), 2 * (b - a)) == pytest.approx(ttw_tilde_angular(phi, k, a, b), rel=1e-12)


@pytest.mark.parametrize("k", [1, 2, 3, 4, "3/2"])
def test_rotation_identity(k):
    kf = float(Fraction(k))
    phi = np.random.default_rng(5).uniform(0.02, 0.98, 100) * math.pi / kf
    lhs = eval_F2(phi + math.pi / (2 * kf), k, 1.0, 0.4)
    rhs = eval_F1(phi, k, 1.0, 0.4)
    assert np.max(np.abs(lhs - rhs) / np.maximum(1, np.abs(rhs))) < 1e-12


@pytest.mark.parametrize("k", [1, 2, 3, 4, "3/2"])
@pytest.mark.parametrize("family", ["F1", "F2"])
def test_defining_ode_residual(family, k):
    pot = (V1 if family == "F1" else V2)(k=k, k_a=1.0, k_b=0.4)
    lo, hi = pot.wedge
    phi = np.random.default_rng(7).uniform(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo), 100)
    assert ode_residual(family, phi, k, 1.0, 0.4).max() < 1e-10


def test_wrong_sign_ode_is_not_satisfied():
    # the F2 barrier fails the ODE with the opposite sign on the F-term
    phi = np.linspace(-0.4, 0.4, 9)
    k, ka, kb = 1, 1.0, 0.4
    F = eval_F2(phi, k, ka, kb)
    dF = (eval_F2(phi + 1e-6, k, ka, kb) - eval_F2(phi - 1e-6, k, ka, kb)) / 2e-6
    wrong = np.cos(phi) * dF + 2 * np.sin(phi) * F + kb
    assert np.max(np.abs(wrong)) > 0.1


def test_ode_solve_homogeneous():
    k, phi0 = 2, 0.3
    F0 = 1 / math.sin(k * phi0) ** 2
    for phi1 in (0.5, 0.9, 1.4):
        assert f_ode_solve(0.0, k, phi0, F0, phi1) == pytest.approx(1 / math.sin(k * phi1) ** 2, abs=1e-8)


def test_ode_solve_closed_form():
    k_a = closed_form_k_a(0.5, 2, math.pi / 4, 1.0)
    assert k_a == pytest.approx(1.0)
    got = f_ode_solve(0.5, 2, math.pi / 4, 1.0, math.pi / 3)
    assert got == pytest.approx(eval_F1(math.pi / 3, 2, 1.0, 1.0), abs=1e-8)


def test_ode_solve_f2_family():
    k, phi0 = 3, 0.1
    ka = closed_form_k_a(0.2, k, phi0, 2.0, family="F2")
    got = f_ode_solve(0.2, k, phi0, 2.0, -0.3, family="F2")
    assert got == pytest.approx(eval_F2(-0.3, k, ka, 0.4), abs=1e-8)


def test_ode_solve_linearity():
    k, phi0, phi1 = 3, 0.4, 0.7
    a = f_ode_solve(0.3, k, phi0, 1.5, phi1)
    b = f_ode_solve(-0.1, k, phi0, 0.2, phi1)
    c = f_ode_solve(0.2, k, phi0, 1.7, phi1)
    # superposition of particular+homogeneous solutions of an affine ODE
    assert a + b == pytest.approx(c, abs=1e-8)


def test_ode_solve_refuses_singular_ray():
    with pytest.raises(DomainError):
        f_ode_solve(0.1, 2, 0.3, 1.0, 1.8)


def test_rational_k_is_reduced():
    assert V1(k="6/4").k == Fraction(3, 2)
    assert as_rational(1.4142135) == Fraction(2828427, 2000000)


def test_degenerations():
    # V1 with k_b = 0 at 2k is TTW with alpha = beta = k_a / 4
    phi = np.linspace(0.05, 0.7, 20)
    assert np.allclose(eval_F1(phi, 4, 2.0, 0.0), ttw_angular(phi, 2, 0.5, 0.5), rtol=1e-13)
    x, y = 0.7, 1.3
    assert GenSW(w0=1.0, k1=0.2, k2=0.5).value_xy(x, y) == pytest.approx(
        0.5 * (x * x + y * y) + 0.1 / x**2 + 0.25 / y**2)


def test_confining_rule_and_factory():
    assert is_confining(V1(k=2, k_a=1, k_b=0.4))
    assert not is_confining(V2(k=2, k_a=0.2, k_b=0.4))
    pot = potential_from_dict({"kind": "V2", "k": "3/2", "k_a": 1.0, "k_b": 0.4})
    assert pot == V2(k=Fraction(3, 2), k_a=1.0, k_b=0.4)
    assert potential_from_dict(pot.to_dict()) == pot
    with pytest.raises(DomainError):
        potential_from_dict({"kind": "V3"})
    with pytest.raises(DomainError):
        potential_from_dict({"kind": "HO", "k": 1})


def test_ttw_wedge_and_v1_equivalent():
    pot = TTW(k=2, alpha=0.5, beta=1.5)
    v1 = pot.to_v1()
    assert v1.k == 4 and v1.k_a == pytest.approx(4.0) and v1.k_b == pytest.approx(2.0)
    for phi in np.linspace(0.05, math.pi / 4 - 0.05, 10):
        assert pot.value_polar(1.1, phi) == pytest.approx(v1.value_polar(1.1, phi), rel=1e-13)
