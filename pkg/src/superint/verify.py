"""The residual and identity suite behind ``superint verify``.

Each check is a module-level function returning a :class:`CheckResult`; the
suite runs them (optionally in a process pool) and merges results in
declaration order so reports are byte-for-byte reproducible for a seed.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .brackets import (
    BracketConfig,
    constant_residual,
    evolution_residual,
    independence_rank,
    standard_handles,
    step1_check,
)
from .dynamics import drift_report, integrate
from .errors import StencilError, SuperintError
from .observables import eval_B, eval_J, eval_K, one_dof_energies
from .phase import CartesianState, PolarState, to_polar
from .potentials import (
    HO,
    V1,
    V2,
    GenSW,
    eval_F1,
    eval_F2,
    f1_cartesian,
    f2_cartesian,
    ode_residual,
    ttw_angular,
    ttw_tilde_angular,
)
from .sampling import cartesian_quadrant_states, wedge_states

WORKERS_ENV = "SUPERINT_WORKERS"

K_ALL = ("1", "2", "3", "4", "3/2")
K_V2 = ("1", "2", "3")
K_A, K_B = 1.0, 0.4


@dataclass
class CheckResult:
    name: str
    value: float
    threshold: float
    passed: bool
    comparison: str = "<"
    stats: dict = field(default_factory=dict)
    error: str | None = None

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        extra = f" ({self.error})" if self.error else ""
        return f"[{flag}] {self.name}: {self.value:.3e} {self.comparison} {self.threshold:.1e}{extra}"


@dataclass(frozen=True)
class SuiteSettings:
    seed: int = 42
    samples: int = 200
    rank_samples: int = 500
    fd_step: float = 1e-6
    scheme: str = "central-fd"
    w0: float = 1.0


def _rng(settings, tag):
    # independent, order-free stream per check
    return np.random.default_rng([settings.seed, *tag.encode()])


def _summary(values):
    v = np.asarray(values, dtype=float)
    return {"max": float(v.max()), "mean": float(v.mean()), "min": float(v.min()), "n": int(v.size)}


def _max_check(name, values, threshold, **stats):
    s = _summary(values)
    s.update(stats)
    return CheckResult(name, s["max"], threshold, bool(s["max"] < threshold), "<", s)


# ---------------------------------------------------------------------------
# bracket checks


def check_evolution(which, family, k, settings: SuiteSettings, threshold=1e-6):
    cfg = BracketConfig(fd_step=settings.fd_step, scheme=settings.scheme)
    if which == "A_x":
        n = int(k)
        pot = HO(n * settings.w0, settings.w0)
        label = f"evolution:A_x:HO:n_x={n}"
    elif which == "B_x":
        pot = GenSW(w0=settings.w0, n_x=1, n_y=3, k1=0.3, k2=0.5)
        label = "evolution:B_x:GenSW:k1=0.3"
    else:
        pot = (V1 if family == "V1" else V2)(w0=settings.w0, k=k, k_a=K_A, k_b=K_B)
        label = f"evolution:{which}:{family}:k={k}"
    states = wedge_states(pot, _rng(settings, label), settings.samples)
    res = [evolution_residual(which, s, pot, cfg) for s in states]
    return _max_check(label, res, threshold, fd_step=settings.fd_step, scheme=settings.scheme)


def check_constant(name, family, k, settings: SuiteSettings, threshold=1e-6):
    cfg = BracketConfig(fd_step=settings.fd_step, scheme=settings.scheme)
    pot = (V1 if family == "V1" else V2)(w0=settings.w0, k=k, k_a=K_A, k_b=K_B)
    label = f"constant:{name}:{family}:k={k}"
    f = standard_handles(pot)[name] if name != "K" else (lambda p: eval_K(p, pot))
    states = wedge_states(pot, _rng(settings, label), settings.samples)
    res = [constant_residual(name, f, s, pot, cfg) for s in states]
    return _max_check(label, res, threshold, fd_step=settings.fd_step)


# ---------------------------------------------------------------------------
# identities


def _interior_angles(rng, n, lo, hi, margin=0.05):
    w = hi - lo
    return rng.uniform(lo + margin * w, hi - margin * w, n)


def _rel(a, b):
    return np.abs(a - b) / np.maximum(1.0, np.abs(b))


def check_ode(family, k, settings: SuiteSettings, threshold=1e-10):
    label = f"ode:{family}:k={k}"
    pot = (V1 if family == "F1" else V2)(k=k, k_a=K_A, k_b=K_B)
    lo, hi = pot.wedge
    phi = _interior_angles(_rng(settings, label), settings.samples, lo, hi)
    res = ode_residual(family, phi, k, K_A, K_B, fd_step=1e-6)
    return _max_check(label, res, threshold)


def check_cartesian(family, k, settings: SuiteSettings, threshold=1e-12):
    label = f"cartesian:{family}:k={k}"
    pot = (V1 if family == "F1" else V2)(k=k, k_a=K_A, k_b=K_B)
    rng = _rng(settings, label)
    lo, hi = pot.wedge
    phi0 = _interior_angles(rng, settings.samples, lo, hi)
    r0 = rng.uniform(0.5, 2.0, settings.samples)
    x, y = r0 * np.cos(phi0), r0 * np.sin(phi0)
    p = to_polar(CartesianState(x, y, 0 * x, 0 * x), center=pot.wedge_center)
    if family == "F1":
        lhs = f1_cartesian(int(k), x, y, K_A, K_B)
        rhs = eval_F1(p.phi, k, K_A, K_B) / p.r**2
    else:
        lhs = f2_cartesian(int(k), x, y, K_A, K_B)
        rhs = eval_F2(p.phi, k, K_A, K_B) / p.r**2
    return _max_check(label, _rel(lhs, rhs), threshold)


def check_ttw_map(settings: SuiteSettings, threshold=1e-12):
    label = "identity:ttw-map"
    rng = _rng(settings, label)
    res = []
    for _ in range(settings.samples):
        k = Fraction(int(rng.integers(1, 9)), int(rng.integers(1, 4)))
        a, b = rng.uniform(0.1, 3.0, 2)
        phi = _interior_angles(rng, 1, 0.0, math.pi / (2 * float(k)))[0]
        lhs = eval_F1(phi, 2 * k, 2 * (a + b), 2 * (b - a))
        rhs = ttw_angular(phi, k, a, b)
        res.append(float(_rel(lhs, rhs)))
    return _max_check(label, res, threshold)


def check_ttw_tilde(settings: SuiteSettings, threshold=1e-12):
    label = "identity:ttw-tilde"
    rng = _rng(settings, label)
    res = []
    for _ in range(settings.samples):
        k = Fraction(int(rng.integers(1, 9)), int(rng.integers(1, 4)))
        a, b = rng.uniform(0.1, 3.0, 2)
        half = math.pi / (2 * float(k))
        phi = _interior_angles(rng, 1, -half, half)[0]
        lhs = eval_F2(phi, k, 2 * (a + b), 2 * (b - a))
        rhs = ttw_tilde_angular(phi, k, a, b)
        res.append(float(_rel(lhs, rhs)))
    return _max_check(label, res, threshold)


def check_rotation(settings: SuiteSettings, threshold=1e-12):
    label = "identity:rotation"
    rng = _rng(settings, label)
    res = []
    for k in K_ALL:
        kf = float(Fraction(k))
        phi = _interior_angles(rng, settings.samples, 0.0, math.pi / kf)
        lhs = eval_F2(phi + math.pi / (2 * kf), k, K_A, K_B)
        rhs = eval_F1(phi, k, K_A, K_B)
        res.extend(_rel(lhs, rhs))
    return _max_check(label, res, threshold)


def check_moduli(settings: SuiteSettings, threshold=1e-10):
    label = "identity:moduli"
    pot = GenSW(w0=settings.w0, n_x=2, n_y=3, k1=0.3, k2=0.7)
    x, y, px, py = cartesian_quadrant_states(_rng(settings, label), settings.samples)
    s = CartesianState(x, y, px, py)
    Bx, By = eval_B(s, pot)
    Ex, Ey = one_dof_energies(s, pot)
    w2 = pot.w0**2
    rx = np.abs(np.abs(Bx) ** 2 - 4 * (Ex**2 - pot.k1 * pot.n_x**2 * w2))
    ry = np.abs(np.abs(By) ** 2 - 4 * (Ey**2 - pot.k2 * pot.n_y**2 * w2))
    return _max_check(label, np.concatenate([rx, ry]), threshold)


# ---------------------------------------------------------------------------
# central potentials and independence


def _step1_states(rng, n):
    """States with ``r`` in [0.5, 2], ``|p| <= 2``, and ``|p_phi| >= 0.1``.

    The non-central residual is proportional to ``p_phi``, so states with
    vanishing angular momentum are excluded as non-generic.
    """
    out = []
    for _ in range(n):
        pphi = rng.uniform(0.1, 2.0) * rng.choice([-1.0, 1.0])
        out.append(PolarState(rng.uniform(0.5, 2.0), rng.uniform(-math.pi, math.pi), rng.uniform(-2, 2), pphi))
    return out


def check_step1(m, settings: SuiteSettings, c=1.0):
    cfg = BracketConfig(fd_step=settings.fd_step, scheme=settings.scheme)
    label = f"step1:m={m}"
    states = _step1_states(_rng(settings, label), settings.samples)
    pairs = [step1_check(c, m, s, cfg) for s in states]
    ri = [p[0] for p in pairs]
    rr = [p[1] for p in pairs]
    stats = {"residual_i": _summary(ri), "residual_r": _summary(rr)}
    # (i) holds for every U; FD noise only, gated at the bracket-suite level
    ok_i = max(ri) < 1e-6
    if m == 2:
        v = max(rr)
        return CheckResult(label, v, 1e-8, bool(v < 1e-8 and ok_i), "<", stats)
    v = min(rr)
    return CheckResult(label, v, 1e-2, bool(v > 1e-2 and ok_i), ">", stats)


def check_rank(settings: SuiteSettings, k="2", with_re=False, min_fraction=0.95):
    cfg = BracketConfig(fd_step=settings.fd_step, scheme=settings.scheme)
    pot = V1(w0=settings.w0, k=k, k_a=K_A, k_b=K_B)
    label = f"rank:{'J1,J2,ImK,ReK' if with_re else 'J1,J2,ImK'}:k={k}"
    h = standard_handles(pot)
    obs = [h["J1"], h["J2"], h["ImK"]] + ([h["ReK"]] if with_re else [])
    states = wedge_states(pot, _rng(settings, "rank"), settings.rank_samples)
    ranks = [independence_rank(obs, s, cfg, pot) for s in states]
    frac = float(np.mean(np.array(ranks) == 3))
    counts = {str(r): int(np.sum(np.array(ranks) == r)) for r in sorted(set(ranks))}
    return CheckResult(label, frac, min_fraction, frac >= min_fraction, ">=", {"rank_counts": counts})


# ---------------------------------------------------------------------------
# trajectories

ACCEPTANCE_START = {"r": 1.2, "offset": 0.3, "pr": 0.3, "pphi": 0.5}


def acceptance_start(pot):
    """Fixed generic initial state: off-centre in the wedge, both momenta nonzero."""
    a = ACCEPTANCE_START
    return PolarState(a["r"], pot.wedge_center + a["offset"] * pot.wedge_half_width, a["pr"], a["pphi"])


def check_drift(family, k, scheme="leapfrog", periods=100, steps_per_period=2000, threshold=1e-7, w0=1.0):
    pot = (V1 if family == "V1" else V2)(w0=w0, k=k, k_a=K_A, k_b=K_B)
    T_r = math.pi / w0
    traj = integrate(acceptance_start(pot), pot, T_r / steps_per_period, periods * T_r, scheme)
    rep = drift_report(traj)
    # J1 = 2H, so its relative drift is that of H
    drifts = {"J1": rep.max_relative["H"], "J2": rep.max_relative["J2"],
              "ReK": rep.max_relative["ReK"], "ImK": rep.max_relative["ImK"]}
    worst = max(drifts.values())
    label = f"drift:{family}:k={k}:{scheme}"
    return CheckResult(label, worst, threshold, bool(worst < threshold and not traj.boundary), "<",
                       {"drift": drifts, "boundary": traj.boundary, "steps": rep.steps})


def step_sweep(settings: SuiteSettings, factors=(0.1, 1.0, 10.0, 100.0)):
    """Worst M residual (V1, k=3) against the finite-difference step.

    Shows the second-order growth of the stencil error with the step, so a
    report run at a coarse ``fd_step`` explains its own failures.
    """
    pot = V1(w0=settings.w0, k="3", k_a=K_A, k_b=K_B)
    states = wedge_states(pot, _rng(settings, "step-sweep"), min(settings.samples, 50))
    out = []
    for f in factors:
        h = float(f"{settings.fd_step * f:.6g}")
        if not 1e-12 < h <= 1e-2:
            continue
        cfg = BracketConfig(fd_step=h, scheme="central-fd")
        res = []
        for s in states:
            # a coarse stencil needs more clearance; such states are left out
            try:
                res.append(evolution_residual("M", s, pot, cfg))
            except StencilError:
                pass
        out.append({"fd_step": cfg.fd_step, "states": len(res), "max_residual": max(res) if res else None})
    return out


# ---------------------------------------------------------------------------
# suite


def suite_plan(settings: SuiteSettings):
    """``(function, args)`` pairs in report order."""
    plan = []
    for n in ("1", "2", "3"):
        plan.append((check_evolution, ("A_x", "HO", n, settings)))
    plan.append((check_evolution, ("B_x", "GenSW", None, settings)))
    for k in K_ALL:
        plan.append((check_evolution, ("M", "V1", k, settings)))
        plan.append((check_evolution, ("N", "V1", k, settings)))
    for k in K_V2:
        plan.append((check_evolution, ("M", "V2", k, settings)))
        plan.append((check_evolution, ("N2", "V2", k, settings)))
    for fam, ks in (("V1", K_ALL), ("V2", K_V2)):
        for k in ks:
            plan.append((check_constant, ("K", fam, k, settings)))
    for name in ("J1", "J2"):
        plan.append((check_constant, (name, "V1", "3", settings)))
    for fam in ("F1", "F2"):
        for k in K_ALL:
            plan.append((check_ode, (fam, k, settings)))
        for k in ("1", "2", "3", "4"):
            plan.append((check_cartesian, (fam, k, settings)))
    plan.append((check_ttw_map, (settings,)))
    plan.append((check_ttw_tilde, (settings,)))
    plan.append((check_rotation, (settings,)))
    plan.append((check_moduli, (settings,)))
    for m in (1, 2, 3, 4):
        plan.append((check_step1, (m, settings)))
    plan.append((check_rank, (settings, "2", False)))
    plan.append((check_rank, (settings, "2", True)))
    return plan


def _run_one(item):
    fn, args = item
    try:
        return fn(*args)
    except SuperintError as exc:
        parts = [str(a) for a in args if not isinstance(a, SuiteSettings)]
        name = ":".join([fn.__name__.removeprefix("check_"), *parts])
        return CheckResult(name, math.nan, math.nan, False, error=f"{type(exc).__name__}: {exc}")


def worker_count():
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def run_suite(settings: SuiteSettings, workers=None):
    plan = suite_plan(settings)
    workers = worker_count() if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_one, plan))
    return [_run_one(item) for item in plan]


def report_dict(results, settings: SuiteSettings):
    return {
        "settings": asdict(settings),
        "all_passed": all(r.passed for r in results),
        "checks": [asdict(r) for r in results],
    }
