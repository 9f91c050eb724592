"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every criterion logs one PASS/FAIL line, collected into the "acceptance
criteria" section at the end of the pytest run.
"""
import math
import time

import numpy as np
import pytest

from superint import HO, V1, CartesianState, find_closure, integrate
from superint.verify import (
    K_ALL,
    K_V2,
    SuiteSettings,
    acceptance_start,
    check_cartesian,
    check_constant,
    check_drift,
    check_evolution,
    check_moduli,
    check_ode,
    check_rank,
    check_rotation,
    check_step1,
    check_ttw_map,
    check_ttw_tilde,
)

SETTINGS = SuiteSettings(seed=42, samples=200, rank_samples=500)


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def _worst(results):
    return max(results, key=lambda r: r.value if r.comparison == "<" else -r.value)


def _record(log, number, title, ok, detail):
    log.append((number, title, ok, detail))
    assert ok, detail


def test_criterion_1_evolution_laws(acceptance_log):
    def run():
        out = [check_evolution("A_x", "HO", n, SETTINGS) for n in ("1", "2", "3")]
        out.append(check_evolution("B_x", "GenSW", None, SETTINGS))
        for k in K_ALL:
            out += [check_evolution("M", "V1", k, SETTINGS), check_evolution("N", "V1", k, SETTINGS)]
        out += [check_evolution("N2", "V2", k, SETTINGS) for k in K_V2]
        return out

    results, dt = _timed(run)
    w = _worst(results)
    ok = all(r.passed for r in results) and dt < 10
    detail = f"{len(results)} laws x 200 states, worst {w.name} = {w.value:.2e} < 1e-6, {dt:.1f} s < 10 s"
    _record(acceptance_log, 1, "evolution laws", ok, detail)


def test_criterion_2_constants_of_motion(acceptance_log):
    def run():
        brackets = [check_constant("K", fam, k, SETTINGS) for fam in ("V1", "V2") for k in K_V2]
        drifts = [check_drift(fam, k) for fam in ("V1", "V2") for k in K_V2]
        return brackets, drifts

    (brackets, drifts), dt = _timed(run)
    wb, wd = _worst(brackets), _worst(drifts)
    ok = all(r.passed for r in brackets + drifts) and dt < 60
    n_drift = sum(r.passed for r in drifts)
    detail = (f"{{K,H}} worst {wb.name} = {wb.value:.2e} < 1e-6; leapfrog h = T_r/2000 drift "
              f"{n_drift}/{len(drifts)} runs < 1e-7, worst {wd.name} = {wd.value:.2e}; {dt:.1f} s < 60 s")
    _record(acceptance_log, 2, "constants of motion", ok, detail)


@pytest.mark.parametrize("family", ["V1", "V2"])
@pytest.mark.parametrize("k", K_V2)
def test_drift_with_sixth_order_splitting(family, k):
    # same start, step and span as criterion 2, with the sixth-order composition
    r = check_drift(family, k, scheme="leapfrog6")
    assert r.passed, r.stats


def test_criterion_3_identities(acceptance_log):
    def run():
        ode = [check_ode(fam, k, SETTINGS) for fam in ("F1", "F2") for k in K_ALL]
        exact = [check_cartesian(fam, k, SETTINGS) for fam in ("F1", "F2") for k in ("1", "2", "3", "4")]
        exact += [check_ttw_map(SETTINGS), check_ttw_tilde(SETTINGS), check_rotation(SETTINGS)]
        return ode, exact

    (ode, exact), dt = _timed(run)
    wo, we = _worst(ode), _worst(exact)
    ok = all(r.passed for r in ode + exact) and dt < 5
    detail = (f"ODE worst {wo.name} = {wo.value:.2e} < 1e-10; exact identities worst {we.name} = "
              f"{we.value:.2e} < 1e-12; {dt:.1f} s < 5 s")
    _record(acceptance_log, 3, "identities", ok, detail)


def test_criterion_4_central_potential(acceptance_log):
    results, dt = _timed(lambda: [check_step1(m, SETTINGS) for m in (1, 2, 3, 4)])
    by_m = {r.name: r for r in results}
    ok = all(r.passed for r in results) and dt < 5
    others = min(by_m[f"step1:m={m}"].value for m in (1, 3, 4))
    detail = (f"U = r^2 max residual_r {by_m['step1:m=2'].value:.2e} < 1e-8; m in {{1,3,4}} min residual_r "
              f"{others:.2e} > 1e-2; {dt:.1f} s < 5 s")
    _record(acceptance_log, 4, "central-potential test", ok, detail)


def test_criterion_5_rank(acceptance_log):
    results, dt = _timed(lambda: [check_rank(SETTINGS, "2", False), check_rank(SETTINGS, "2", True)])
    three, four = results
    ok = three.passed and four.passed and dt < 10
    detail = (f"rank(J1,J2,ImK) = 3 at {three.value:.1%}, rank(J1,J2,ImK,ReK) = 3 at {four.value:.1%} "
              f"of 500 states (>= 95%); {dt:.1f} s < 10 s")
    _record(acceptance_log, 5, "superintegrability rank", ok, detail)


def test_criterion_6_closure(acceptance_log):
    def run():
        out = {}
        for k in ("1", "2", "3", "3/2"):
            pot = V1(k=k, k_a=1.0, k_b=0.4)
            out[k] = find_closure(acceptance_start(pot), pot, math.pi / 2000, eps=1e-4)[0]
        pot = V1(k=math.sqrt(2), k_a=1.0, k_b=0.4)
        out["sqrt2"] = find_closure(acceptance_start(pot), pot, math.pi / 1000, eps=1e-4, max_time=100 * math.pi)[0]
        return out

    res, dt = _timed(run)
    rational = [res[k] for k in ("1", "2", "3", "3/2")]
    ok = all(r.closed for r in rational) and not res["sqrt2"].closed and dt < 60
    worst = max(r.return_distance for r in rational)
    detail = (f"k in {{1,2,3,3/2}} closed, worst return {worst:.1e} < 1e-4; k = sqrt 2 {res['sqrt2'].status} "
              f"(nearest return {res['sqrt2'].return_distance:.1e}); {dt:.1f} s < 60 s")
    _record(acceptance_log, 6, "closure", ok, detail)


def test_criterion_7_moduli(acceptance_log):
    r = check_moduli(SETTINGS)
    _record(acceptance_log, 7, "B moduli", r.passed, f"max |B|^2 defect {r.value:.2e} < 1e-10 on 200 states")


def test_criterion_8_integrator_sanity(acceptance_log):
    circle = CartesianState(1.0, 0.0, 0.0, 1.0)
    traj = integrate(circle, HO(1, 1), 2 * math.pi / 1000, 20 * math.pi, "leapfrog4")
    radius = float(np.max(np.abs(np.hypot(traj.states[:, 0], traj.states[:, 1]) - 1.0)))

    pot = V1(k=3, k_a=1.0, k_b=0.4)
    s0 = acceptance_start(pot)
    fwd = integrate(s0, pot, math.pi / 2000, 10 * math.pi, "leapfrog", track=False)
    x, y, px, py = fwd.states[-1]
    back = integrate(CartesianState(x, y, -px, -py), pot, math.pi / 2000, 10 * math.pi, "leapfrog", track=False)
    end = back.states[-1] * np.array([1, 1, -1, -1])
    reversal = float(np.max(np.abs(end - fwd.states[0])))

    ok = radius < 1e-6 and reversal < 1e-8
    detail = f"circle radius error {radius:.1e} < 1e-6 over 10 periods; time-reversal return {reversal:.1e} < 1e-8"
    _record(acceptance_log, 8, "integrator sanity", ok, detail)
