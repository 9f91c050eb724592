"""Trajectory integration, invariant drift and closed-orbit detection.

Integration runs in Cartesian coordinates, where the kinetic term is
momentum-diagonal and kick-drift-kick splitting is explicit.  Schemes:

``leapfrog``
    second-order Stormer-Verlet (kick-drift-kick), symplectic and reversible.
``leapfrog4`` / ``leapfrog6``
    fourth- and sixth-order compositions of 3 and 7 leapfrog substeps
    (Yoshida weights); still symplectic and reversible.
``rk4``
    classical Runge-Kutta, a non-symplectic cross-check.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, IntegrationError
from .observables import tracked_invariants
from .phase import CartesianState, PolarState, to_cartesian
from .potentials import GUARD_ZONE, HO, TTW, V1, V2, GenSW, is_confining

SCHEMES = ("leapfrog", "leapfrog4", "leapfrog6", "rk4")
INVARIANT_NAMES = ("H", "J2", "ReK", "ImK")

_CBRT2 = 2.0 ** (1.0 / 3.0)
_YOSHIDA4 = (1.0 / (2.0 - _CBRT2), -_CBRT2 / (2.0 - _CBRT2), 1.0 / (2.0 - _CBRT2))
# Yoshida (1990) sixth-order "solution A"
_W6 = (0.784513610477560, 0.235573213359357, -1.17767998417887)
_YOSHIDA6 = _W6 + (1.0 - 2.0 * sum(_W6),) + _W6[::-1]
_WEIGHTS = {"leapfrog": (1.0,), "leapfrog4": _YOSHIDA4, "leapfrog6": _YOSHIDA6}


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n, 4): x, y, px, py at the stored (decimated) times
    step: float
    potential: object
    scheme: str
    invariant_track: np.ndarray  # (n_steps + 1, 4), every step
    track_times: np.ndarray
    boundary: bool = False
    wall_time: float = 0.0

    def __len__(self):
        return len(self.times)

    @property
    def truncated(self):
        return self.boundary

    def state(self, i) -> CartesianState:
        return CartesianState.from_array(self.states[i], t=float(self.times[i]))


@dataclass
class DriftReport:
    max_relative: dict
    rms: dict
    steps: int
    wall_time: float = 0.0
    relative: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "max_relative_drift": self.max_relative,
            "rms_drift": self.rms,
            "relative": self.relative,
            "steps": self.steps,
        }


@dataclass
class ClosureResult:
    closed: bool
    period_estimate: float
    return_distance: float
    status: str  # "closed", "not_closed" or "inconclusive"
    horizon: float
    radial_period: float

    def as_dict(self):
        return {
            "closed": self.closed,
            "status": self.status,
            "period_estimate": self.period_estimate,
            "return_distance": self.return_distance,
            "horizon": self.horizon,
            "radial_period": self.radial_period,
        }


# ---------------------------------------------------------------------------
# force fields


def _angular_grad(pot):
    """Plain-float gradient closure for the polar families (hot path)."""
    w2 = pot.w0**2
    center = pot.wedge_center
    cc, sc = math.cos(center), math.sin(center)
    if isinstance(pot, TTW):
        kf, a, b = float(pot.k), pot.alpha, pot.beta

        def Fs(phi):
            s, c = math.sin(kf * phi), math.cos(kf * phi)
            return (a / (c * c) + b / (s * s),
                    2 * kf * a * s / (c * c * c) - 2 * kf * b * c / (s * s * s))
    elif isinstance(pot, V1):
        kf, ka, kb = float(pot.k), pot.k_a, pot.k_b

        def Fs(phi):
            s, c = math.sin(kf * phi), math.cos(kf * phi)
            return ((ka + kb * c) / (s * s),
                    -kf * kb / s - 2 * kf * c * (ka + kb * c) / (s * s * s))
    else:
        kf, ka, kb = float(pot.k), pot.k_a, pot.k_b

        def Fs(phi):
            s, c = math.sin(kf * phi), math.cos(kf * phi)
            return ((ka + kb * s) / (c * c),
                    kf * kb / c + 2 * kf * s * (ka + kb * s) / (c * c * c))

    def grad(x, y):
        phi = center + math.atan2(y * cc - x * sc, x * cc + y * sc)
        f, fp = Fs(phi)
        r2 = x * x + y * y
        r4 = r2 * r2
        return w2 * x - 0.5 * (fp * y + 2 * f * x) / r4, w2 * y + 0.5 * (fp * x - 2 * f * y) / r4

    return grad


def _angular_guard(pot):
    center = pot.wedge_center
    cc, sc = math.cos(center), math.sin(center)
    trig = math.cos if isinstance(pot, V2) else math.sin
    kf = 2 * float(pot.k) if isinstance(pot, TTW) else float(pot.k)
    half = pot.wedge_half_width

    def guard(x, y):
        u = math.atan2(y * cc - x * sc, x * cc + y * sc)
        # a large step can jump clean over a singular ray
        if abs(u) >= half:
            return 0.0
        return abs(trig(kf * (center + u)))

    return guard


def _separable_grad(pot):
    """Plain-float gradient for HO and GenSW (hot path)."""
    if isinstance(pot, HO):
        ax, ay, k1, k2 = pot.w1**2, pot.w2**2, 0.0, 0.0
    else:
        w2 = pot.w0**2
        ax, ay, k1, k2 = w2 * pot.n_x**2, w2 * pot.n_y**2, pot.k1, pot.k2

    def grad(x, y):
        return ax * x - k1 / (x * x * x) if k1 else ax * x, ay * y - k2 / (y * y * y) if k2 else ay * y

    return grad


def force_field(pot):
    if isinstance(pot, (V1, V2, TTW)):
        return _angular_grad(pot)
    if isinstance(pot, (HO, GenSW)):
        return _separable_grad(pot)
    return lambda x, y: tuple(float(g) for g in pot.grad_xy(x, y))


def guard_function(pot):
    if isinstance(pot, (V1, V2, TTW)):
        return _angular_guard(pot)
    return pot.guard


# ---------------------------------------------------------------------------
# integration


def integrate(s0, pot, h, T, scheme="leapfrog", decimation=1, track=True):
    """Integrate Hamilton's equations from ``s0`` for time ``T`` with step ``h``.

    Stops early (``boundary=True``) if the state enters the singularity guard
    zone.  ``decimation`` thins the stored states; the invariant track is
    kept at every step.
    """
    if scheme not in SCHEMES:
        raise DomainError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
    if not h > 0 or not T >= 0:
        raise DomainError("need h > 0 and T >= 0")
    if decimation < 1:
        raise DomainError("decimation must be >= 1")
    if isinstance(s0, PolarState):
        s0 = to_cartesian(s0)
    if not is_confining(pot):
        raise DomainError("V1/V2 trajectories need k_a > |k_b| (repulsive barriers on both wedge edges)")
    n_steps = int(round(T / h))
    x, y, px, py = float(s0.x), float(s0.y), float(s0.px), float(s0.py)
    if pot.guard(x, y) < GUARD_ZONE:
        raise DomainError("initial state is inside the singularity guard zone")
    grad = force_field(pot)
    guard = guard_function(pot)
    xs, ys, pxs, pys = [x], [y], [px], [py]
    boundary = False
    started = time.perf_counter()

    if scheme == "rk4":
        def f(x, y, px, py):
            gx, gy = grad(x, y)
            return px, py, -gx, -gy

        for _ in range(n_steps):
            k1 = f(x, y, px, py)
            k2 = f(x + 0.5 * h * k1[0], y + 0.5 * h * k1[1], px + 0.5 * h * k1[2], py + 0.5 * h * k1[3])
            k3 = f(x + 0.5 * h * k2[0], y + 0.5 * h * k2[1], px + 0.5 * h * k2[2], py + 0.5 * h * k2[3])
            k4 = f(x + h * k3[0], y + h * k3[1], px + h * k3[2], py + h * k3[3])
            x += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            y += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            px += h / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
            py += h / 6 * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3])
            if guard(x, y) < GUARD_ZONE:
                boundary = True
                break
            xs.append(x); ys.append(y); pxs.append(px); pys.append(py)  # noqa: E702
    else:
        weights = _WEIGHTS[scheme]
        subs = [w * h for w in weights]
        gx, gy = grad(x, y)
        for _ in range(n_steps):
            for hh in subs:
                px -= 0.5 * hh * gx
                py -= 0.5 * hh * gy
                x += hh * px
                y += hh * py
                if guard(x, y) < GUARD_ZONE:
                    boundary = True
                    break
                gx, gy = grad(x, y)
                px -= 0.5 * hh * gx
                py -= 0.5 * hh * gy
            if boundary:
                break
            xs.append(x); ys.append(y); pxs.append(px); pys.append(py)  # noqa: E702

    wall = time.perf_counter() - started
    full = np.column_stack([xs, ys, pxs, pys])
    if not np.all(np.isfinite(full)):
        raise IntegrationError("trajectory became non-finite")
    t_full = s0.t + h * np.arange(len(full))
    if track:
        c = CartesianState(full[:, 0], full[:, 1], full[:, 2], full[:, 3])
        inv = np.column_stack([np.asarray(v, dtype=float) * np.ones(len(full)) for v in tracked_invariants(c, pot)])
    else:
        inv = np.full((len(full), 4), np.nan)
    return Trajectory(
        times=t_full[::decimation],
        states=full[::decimation],
        step=h,
        potential=pot,
        scheme=scheme,
        invariant_track=inv,
        track_times=t_full,
        boundary=boundary,
        wall_time=wall,
    )


def drift_report(traj: Trajectory) -> DriftReport:
    """Relative drift of each tracked invariant against its initial value.

    Falls back to absolute drift when the initial magnitude is below 1e-10.
    Invariants the potential does not define are reported as ``None``.
    """
    track = np.asarray(traj.invariant_track, dtype=float)
    if len(track) == 0:
        raise DomainError("empty trajectory")
    max_rel, rms, relative = {}, {}, {}
    for j, name in enumerate(INVARIANT_NAMES):
        col = track[:, j]
        if not np.all(np.isfinite(col)):
            max_rel[name] = rms[name] = relative[name] = None
            continue
        base = abs(col[0])
        rel = base >= 1e-10
        dev = np.abs(col - col[0]) / (base if rel else 1.0)
        max_rel[name] = float(dev.max())
        rms[name] = float(np.sqrt(np.mean(dev**2)))
        relative[name] = bool(rel)
    return DriftReport(max_rel, rms, len(track) - 1, traj.wall_time, relative)


# ---------------------------------------------------------------------------
# closure


def _isotropic_frequency(pot):
    if isinstance(pot, (V1, V2, TTW)):
        return pot.w0
    if isinstance(pot, GenSW):
        return pot.w0
    if isinstance(pot, HO):
        return min(pot.w1, pot.w2)
    return None


def commensurability_denominator(pot) -> int:
    """``q`` of ``k = p/q`` (or of the frequency ratio for HO)."""
    from fractions import Fraction

    if isinstance(pot, TTW):
        return pot.to_v1().k.denominator
    if isinstance(pot, (V1, V2)):
        return pot.k.denominator
    if isinstance(pot, HO) and pot.w1 > 0 and pot.w2 > 0:
        ratio = Fraction(repr(max(pot.w1, pot.w2) / min(pot.w1, pot.w2)))
        return ratio.denominator
    return 1


def radial_period(traj: Trajectory):
    """Mean spacing of same-direction zero crossings of ``d(r^2)/dt``.

    Falls back to ``pi / w0`` for oscillator families when ``r^2`` is
    (numerically) constant, as on a circular orbit.
    """
    s = traj.states
    u = s[:, 0] * s[:, 2] + s[:, 1] * s[:, 3]
    scale = np.max(np.abs(s[:, :2])) * np.max(np.abs(s[:, 2:])) + 1e-300
    if np.max(np.abs(u)) > 1e-8 * scale:
        down = np.nonzero((u[:-1] > 0) & (u[1:] <= 0))[0]
        if len(down) >= 2:
            t = traj.times
            # linear interpolation of the crossing time
            tc = t[down] + (t[down + 1] - t[down]) * u[down] / (u[down] - u[down + 1])
            return float(np.mean(np.diff(tc)))
    w = _isotropic_frequency(traj.potential)
    if w:
        return math.pi / w
    return None


def _phase_scale(pot):
    w = _isotropic_frequency(pot)
    return w if w else 1.0


def _hermite_min(t0, t1, s0, s1, d0, d1, target, scale):
    """Minimum over ``[t0, t1]`` of the distance from the cubic Hermite
    interpolant to ``target``."""
    dt = t1 - t0

    def interp(t):
        u = (t - t0) / dt
        h00 = 2 * u**3 - 3 * u**2 + 1
        h10 = u**3 - 2 * u**2 + u
        h01 = -2 * u**3 + 3 * u**2
        h11 = u**3 - u**2
        return h00 * s0 + h10 * dt * d0 + h01 * s1 + h11 * dt * d1

    def dist(t):
        return float(np.linalg.norm((interp(t) - target) * scale))

    res = minimize_scalar(dist, bounds=(t0, t1), method="bounded", options={"xatol": 1e-12 * max(1.0, abs(t1))})
    return float(res.x), float(res.fun)


def closure_detect(traj: Trajectory, eps: float, safety: float = 4.0) -> ClosureResult:
    """Earliest return of the orbit to within ``eps`` of its initial point.

    Distance is Euclidean over ``(w0 x, w0 y, px, py)``.  The search horizon
    is ``q * T_r * safety`` with ``T_r`` the radial period estimated from the
    trajectory; a trajectory shorter than the horizon that shows no return
    is ``inconclusive`` rather than ``not_closed``.
    """
    pot = traj.potential
    T_r = radial_period(traj)
    span = float(traj.times[-1] - traj.times[0])
    if T_r is None:
        return ClosureResult(False, math.nan, math.nan, "inconclusive", math.nan, math.nan)
    q = commensurability_denominator(pot)
    horizon = q * T_r * safety
    w = _phase_scale(pot)
    scale = np.array([w, w, 1.0, 1.0])
    s = traj.states
    t = traj.times - traj.times[0]
    d = np.linalg.norm((s - s[0]) * scale, axis=1)
    grad = force_field(pot)
    deriv = np.array([[st[2], st[3], *(-g for g in grad(st[0], st[1]))] for st in s])
    speed = np.linalg.norm(deriv * scale, axis=1)

    departed = np.nonzero(d > max(10 * eps, 0.01 * d.max()))[0]
    best = (math.inf, math.nan)
    if len(departed):
        start = max(int(departed[0]), 1)
        limit = min(len(d) - 1, int(np.searchsorted(t, horizon, side="right")))
        for n in range(start, limit):
            if not (d[n] <= d[n - 1] and d[n] <= d[n + 1]):
                continue
            gap = max(t[n + 1] - t[n], t[n] - t[n - 1])
            if d[n] > eps + speed[n] * gap:
                continue
            for a, b in ((n - 1, n), (n, n + 1)):
                tm, dm = _hermite_min(t[a], t[b], s[a], s[b], deriv[a], deriv[b], s[0], scale)
                if dm < best[0]:
                    best = (dm, tm)
            if best[0] < eps:
                return ClosureResult(True, best[1], best[0], "closed", horizon, T_r)
    if not math.isfinite(best[0]) and len(departed):
        # no candidate minimum: report the nearest sampled approach after departure
        n = int(departed[0]) + int(np.argmin(d[departed[0]:]))
        best = (float(d[n]), float(t[n]))
    status = "not_closed" if span >= horizon else "inconclusive"
    return ClosureResult(False, best[1], best[0], status, horizon, T_r)


def find_closure(s0, pot, h, eps=1e-4, scheme="leapfrog4", safety=4.0, max_time=None):
    """Integrate long enough to cover the closure horizon, then detect closure.

    The integration length uses the analytic radial period ``pi / w0`` of the
    oscillator families, padded by 5%; ``max_time`` caps it (for large
    denominators the result is then ``inconclusive``).
    """
    w = _isotropic_frequency(pot)
    if not w:
        raise DomainError(f"closure search needs an oscillator family, got {pot.kind}")
    T = commensurability_denominator(pot) * (math.pi / w) * safety * 1.05
    if max_time is not None:
        T = min(T, max_time)
    traj = integrate(s0, pot, h, T, scheme=scheme, track=False)
    return closure_detect(traj, eps, safety), traj
