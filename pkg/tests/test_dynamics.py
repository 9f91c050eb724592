"""Integrators, drift reports and closed-orbit detection."""
import dataclasses
import math

import numpy as np
import pytest

from superint import HO, TTW, V1, V2, CartesianState, PolarState, closure_detect, drift_report, find_closure, integrate
from superint.dynamics import commensurability_denominator, radial_period
from superint.errors import DomainError
from superint.verify import acceptance_start

CIRCLE = CartesianState(1.0, 0.0, 0.0, 1.0)


def _radius_error(traj):
    return np.max(np.abs(np.hypot(traj.states[:, 0], traj.states[:, 1]) - 1.0))


@pytest.mark.parametrize("scheme", ["leapfrog4", "leapfrog6", "rk4"])
def test_circular_orbit(scheme):
    traj = integrate(CIRCLE, HO(1, 1), 2 * math.pi / 1000, 20 * math.pi, scheme)
    assert _radius_error(traj) < 1e-6


def test_plain_leapfrog_circle_is_second_order():
    # radius error of Stormer-Verlet at h = 2 pi/1000 sits near h^2 / 8
    err = _radius_error(integrate(CIRCLE, HO(1, 1), 2 * math.pi / 1000, 20 * math.pi, "leapfrog"))
    assert 1e-6 < err < 1e-5


def test_ho_circle_row_count():
    traj = integrate(CIRCLE, HO(1, 1), 2 * math.pi / 1000, 2 * math.pi, "rk4")
    assert len(traj) == 1001
    assert np.all(np.diff(traj.times) > 0)


def test_leapfrog_matches_rk4_over_one_period():
    pot = V1(k=2, k_a=1.0, k_b=0.4)
    s0 = acceptance_start(pot)
    h = math.pi / 4000
    a = integrate(s0, pot, h, math.pi, "leapfrog")
    b = integrate(s0, pot, h, math.pi, "rk4")
    assert np.max(np.abs(a.states - b.states)) < 1e-6


@pytest.mark.parametrize("pot", [V1(k=3, k_a=1.0, k_b=0.4), V2(k=2, k_a=1.0, k_b=0.4), TTW(k="3/2", alpha=0.5, beta=1.0)])
def test_time_reversal(pot):
    s0 = acceptance_start(pot)
    fwd = integrate(s0, pot, math.pi / 2000, 10 * math.pi, "leapfrog", track=False)
    x, y, px, py = fwd.states[-1]
    back = integrate(CartesianState(x, y, -px, -py), pot, math.pi / 2000, 10 * math.pi, "leapfrog", track=False)
    x2, y2, px2, py2 = back.states[-1]
    ref = fwd.states[0]
    assert np.max(np.abs(np.array([x2, y2, -px2, -py2]) - ref)) < 1e-8


def test_energy_bounded_vs_secular():
    pot = V1(k=2, k_a=1.0, k_b=0.4)
    s0 = acceptance_start(pot)

    def tenths(scheme):
        H = integrate(s0, pot, math.pi / 100, 1000 * math.pi, scheme).invariant_track[:, 0]
        e = np.abs(H - H[0])
        n = len(e) // 10
        return e[:n].max(), e[-n:].max()

    early, late = tenths("leapfrog")
    assert late < 1.5 * early
    early, late = tenths("rk4")
    assert late > 5 * early


@pytest.mark.parametrize("scheme,order", [("leapfrog", 2), ("leapfrog4", 4), ("leapfrog6", 6)])
def test_convergence_order(scheme, order):
    pot = V1(k=2, k_a=1.0, k_b=0.4)
    s0 = acceptance_start(pot)
    ref = integrate(s0, pot, math.pi / 4000, math.pi, "leapfrog6", track=False).states[-1]
    errs = [np.abs(integrate(s0, pot, math.pi / n, math.pi, scheme, track=False).states[-1] - ref).max()
            for n in (100, 200)]
    assert math.log2(errs[0] / errs[1]) == pytest.approx(order, abs=0.2)


def test_guard_truncation():
    # a near-zero barrier and a coarse step let the orbit jump past the ray
    weak = V1(k=2, k_a=1e-9, k_b=0.0)
    traj = integrate(PolarState(1.0, 0.05, 0.0, -2.0), weak, 0.05, 5.0, "leapfrog")
    assert traj.boundary
    assert len(traj) < 101
    phi = np.arctan2(traj.states[:, 1], traj.states[:, 0])
    assert np.all((phi > 0) & (phi < math.pi / 2))


def test_nonconfining_rejected_and_bad_args():
    with pytest.raises(DomainError):
        integrate(PolarState(1.0, 0.5, 0, 0), V1(k=2, k_a=0.2, k_b=0.4), 0.01, 1.0)
    with pytest.raises(DomainError):
        integrate(CIRCLE, HO(1, 1), -0.01, 1.0)
    with pytest.raises(DomainError):
        integrate(CIRCLE, HO(1, 1), 0.01, 1.0, "euler")


def test_decimation_keeps_full_invariant_track():
    traj = integrate(CIRCLE, HO(1, 1), 0.01, 1.0, "rk4", decimation=10)
    assert len(traj) == 11
    assert traj.invariant_track.shape == (101, 4)


def test_drift_report_constant_and_fault_injection():
    traj = integrate(CIRCLE, HO(1, 1), 0.01, 1.0, "rk4")
    track = traj.invariant_track.copy()
    track[:, 0] = track[0, 0]
    rep = drift_report(dataclasses.replace(traj, invariant_track=track))
    assert rep.max_relative["H"] == 0.0
    track[50, 0] *= 1.01
    rep = drift_report(dataclasses.replace(traj, invariant_track=track))
    assert rep.max_relative["H"] == pytest.approx(1e-2, rel=1e-9)
    assert rep.max_relative["ReK"] is None


def test_drift_report_absolute_fallback():
    traj = integrate(CartesianState(1.0, 0.0, 0.0, 0.0), HO(1, 1), 0.01, 1.0, "rk4")
    rep = drift_report(traj)
    # J2 = p_phi^2 starts at zero, so its drift is absolute
    assert rep.relative["J2"] is False
    assert rep.max_relative["J2"] < 1e-20


def test_closure_circle():
    res, _ = find_closure(CIRCLE, HO(1, 1), 2 * math.pi / 2000)
    assert res.closed and res.status == "closed"
    assert res.period_estimate == pytest.approx(2 * math.pi, abs=1e-4)


@pytest.mark.parametrize("k,periods", [(1, 2), (2, 1), (3, 2), ("3/2", 4), (4, 1)])
def test_closure_rational_k(k, periods):
    pot = V1(k=k, k_a=1.0, k_b=0.4)
    res, _ = find_closure(acceptance_start(pot), pot, math.pi / 2000)
    assert res.closed and res.return_distance < 1e-4
    assert res.period_estimate == pytest.approx(periods * math.pi, rel=1e-6)


def test_closure_irrational_inconclusive():
    pot = V1(k=1.4142135, k_a=1.0, k_b=0.4)
    res, _ = find_closure(acceptance_start(pot), pot, math.pi / 1000, max_time=100 * math.pi)
    assert not res.closed
    assert res.status == "inconclusive"
    assert res.return_distance > 1e-4 and math.isfinite(res.return_distance)


def test_closure_not_closed_when_horizon_covered():
    # eps below the integration error: the return is seen but never within eps
    traj = integrate(CIRCLE, HO(1, 1), 2 * math.pi / 500, 5 * math.pi, "leapfrog", track=False)
    res = closure_detect(traj, 1e-14)
    assert res.status == "not_closed" and not res.closed
    assert res.horizon == pytest.approx(4 * math.pi, rel=1e-4)
    assert 1e-14 < res.return_distance < 1e-3


def test_radial_period_and_denominator():
    pot = V1(k="3/2", k_a=1.0, k_b=0.4)
    traj = integrate(acceptance_start(pot), pot, math.pi / 2000, 8 * math.pi, "leapfrog4", track=False)
    assert radial_period(traj) == pytest.approx(math.pi, rel=1e-4)
    assert commensurability_denominator(pot) == 2
    assert commensurability_denominator(TTW(k="3/2")) == 1
