"""Potential families and their angular barrier functions.

Every polar family here has the shape ``V = w**2 r**2 / 2 + F(phi) / (2 r**2)``
and differs only in the angular function ``F``:

* ``F1 = (k_a + k_b cos(k phi)) / sin(k phi)**2``
* ``F2 = (k_a + k_b sin(k phi)) / cos(k phi)**2``
* TTW: ``alpha / cos(k phi)**2 + beta / sin(k phi)**2``

The Cartesian families (isotropic/anisotropic oscillator, the generalized
Smorodinsky-Winternitz barrier oscillator and the pure power ``c r**m``) are
included so the same integrator and bracket machinery covers them.

All angular formulas accept floats, numpy arrays or :class:`~superint.dual.Dual`
numbers.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import ClassVar

import numpy as np
from scipy.integrate import solve_ivp

from .dual import value_of
from .errors import DomainError, SingularityError

# |sin(k phi)| or |cos(k phi)| below this counts as sitting on a singular ray
SINGULAR_TOL = 1e-12
# integration stops once the guarded trig factor (or |x|, |y|) drops below this
GUARD_ZONE = 1e-6


def as_rational(k) -> Fraction:
    """Reduce ``k`` to a positive fraction ``p/q``.

    Floats go through their shortest repr, so ``1.5`` becomes ``3/2`` and
    ``1.4142135`` becomes ``2828427/2000000`` rather than a 53-bit dyadic.
    """
    if isinstance(k, Fraction):
        frac = k
    elif isinstance(k, (int, np.integer)):
        frac = Fraction(int(k))
    elif isinstance(k, str):
        frac = Fraction(k.strip())
    else:
        kf = float(k)
        if not math.isfinite(kf):
            raise DomainError(f"k must be finite, got {k!r}")
        frac = Fraction(repr(kf))
    if frac <= 0:
        raise DomainError(f"k must be positive, got {k!r}")
    return frac


def _guard(factor, what):
    if np.any(np.abs(value_of(factor)) < SINGULAR_TOL):
        raise SingularityError(f"{what} vanishes: angle lies on a singular ray")


# ---------------------------------------------------------------------------
# angular functions


def eval_F1(phi, k, k_a, k_b):
    """Angular barrier of the first family; singular where sin(k phi) = 0."""
    kf = float(as_rational(k))
    s = np.sin(kf * phi)
    _guard(s, "sin(k phi)")
    return (k_a + k_b * np.cos(kf * phi)) / (s * s)


def eval_F1_prime(phi, k, k_a, k_b):
    kf = float(as_rational(k))
    s = np.sin(kf * phi)
    c = np.cos(kf * phi)
    _guard(s, "sin(k phi)")
    return -kf * k_b / s - 2 * kf * c * (k_a + k_b * c) / (s * s * s)


def eval_F2(phi, k, k_a, k_b):
    """Angular barrier of the second family; singular where cos(k phi) = 0."""
    kf = float(as_rational(k))
    c = np.cos(kf * phi)
    _guard(c, "cos(k phi)")
    return (k_a + k_b * np.sin(kf * phi)) / (c * c)


def eval_F2_prime(phi, k, k_a, k_b):
    kf = float(as_rational(k))
    s = np.sin(kf * phi)
    c = np.cos(kf * phi)
    _guard(c, "cos(k phi)")
    return kf * k_b / c + 2 * kf * s * (k_a + k_b * s) / (c * c * c)


def ttw_angular(phi, k, alpha, beta):
    """``alpha / cos^2(k phi) + beta / sin^2(k phi)``."""
    kf = float(as_rational(k))
    s = np.sin(kf * phi)
    c = np.cos(kf * phi)
    _guard(s, "sin(k phi)")
    _guard(c, "cos(k phi)")
    return alpha / (c * c) + beta / (s * s)


def ttw_angular_prime(phi, k, alpha, beta):
    kf = float(as_rational(k))
    s = np.sin(kf * phi)
    c = np.cos(kf * phi)
    _guard(s, "sin(k phi)")
    _guard(c, "cos(k phi)")
    return 2 * kf * alpha * s / (c * c * c) - 2 * kf * beta * c / (s * s * s)


def ttw_tilde_angular(phi, k, alpha, beta):
    """Sine-substituted TTW barrier ``2a/(1 + sin(k phi)) + 2b/(1 - sin(k phi))``.

    Note the argument is ``k phi`` with no halving; with
    ``k_a = 2(alpha + beta)`` and ``k_b = 2(beta - alpha)`` this equals
    ``eval_F2(phi, k, k_a, k_b)`` at the same ``k``.
    """
    kf = float(as_rational(k))
    s = np.sin(kf * phi)
    _guard(np.cos(kf * phi), "cos(k phi)")
    return 2 * alpha / (1 + s) + 2 * beta / (1 - s)


def ttw_to_f1_params(k, alpha, beta):
    """Map TTW ``(k, alpha, beta)`` onto the F1 family ``(2k, k_a, k_b)``."""
    return 2 * as_rational(k), 2 * (alpha + beta), 2 * (beta - alpha)


# ---------------------------------------------------------------------------
# Cartesian forms.  Each returns F(phi) / r**2 written in x, y.


def _cart_guard(cond, msg):
    if np.any(cond):
        raise SingularityError(msg)


def f1_cartesian(k, x, y, k_a, k_b):
    """First-family barrier over r**2 for integer ``k`` in 1..4, in x, y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r2 = x * x + y * y
    r = np.sqrt(r2)
    _cart_guard(np.abs(y) < SINGULAR_TOL, "F1 is singular on y = 0")
    if k == 1:
        return k_a / y**2 + k_b * x / (y**2 * r)
    if k == 2:
        _cart_guard(np.abs(x) < SINGULAR_TOL, "F1(k=2) is singular on x = 0")
        return (k_a - k_b) / (4 * x**2) + (k_a + k_b) / (4 * y**2)
    if k == 3:
        d = 3 * x**2 - y**2
        _cart_guard(np.abs(d) < SINGULAR_TOL * r2, "F1(k=3) is singular on 3x^2 = y^2")
        return (k_a * r2**2 + k_b * (x**2 - 3 * y**2) * x * r) / (d**2 * y**2)
    if k == 4:
        d = x**2 - y**2
        _cart_guard(np.abs(x) < SINGULAR_TOL, "F1(k=4) is singular on x = 0")
        _cart_guard(np.abs(d) < SINGULAR_TOL * r2, "F1(k=4) is singular on x^2 = y^2")
        return (k_a * r2**3 + k_b * r2 * (x**4 - 6 * x**2 * y**2 + y**4)) / (
            16 * d**2 * x**2 * y**2
        )
    raise DomainError(f"Cartesian form only tabulated for k in 1..4, got {k!r}")


def f2_cartesian(k, x, y, k_a, k_b):
    """Second-family barrier over r**2 for integer ``k`` in 1..4, in x, y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r2 = x * x + y * y
    r = np.sqrt(r2)
    if k == 1:
        _cart_guard(np.abs(x) < SINGULAR_TOL, "F2(k=1) is singular on x = 0")
        return k_a / x**2 + k_b * y / (x**2 * r)
    if k == 2:
        d = x**2 - y**2
        _cart_guard(np.abs(d) < SINGULAR_TOL * r2, "F2(k=2) is singular on x^2 = y^2")
        return k_a * r2 / d**2 + k_b * 2 * x * y / d**2
    if k == 3:
        d = x**2 - 3 * y**2
        _cart_guard(np.abs(x) < SINGULAR_TOL, "F2(k=3) is singular on x = 0")
        _cart_guard(np.abs(d) < SINGULAR_TOL * r2, "F2(k=3) is singular on x^2 = 3y^2")
        return (k_a * r2**2 + k_b * (3 * x**2 - y**2) * y * r) / (d**2 * x**2)
    if k == 4:
        d = x**4 - 6 * x**2 * y**2 + y**4
        _cart_guard(np.abs(d) < SINGULAR_TOL * r2**2, "F2(k=4) is singular where cos(4 phi) = 0")
        return (k_a * r2**3 + 4 * k_b * (x**4 - y**4) * x * y) / d**2
    raise DomainError(f"Cartesian form only tabulated for k in 1..4, got {k!r}")


# ---------------------------------------------------------------------------
# defining first-order ODEs
#
# F1:  sin(k phi) F' + 2k cos(k phi) F + 2k z = 0
# F2:  cos(k phi) F' - 2k sin(k phi) F - 2k z = 0
# with z = k_b / 2 in both.


def ode_terms(family, phi, k, F, dF, z):
    """The three terms of the family's defining ODE (their sum is the residual)."""
    kf = float(as_rational(k))
    s = np.sin(kf * phi)
    c = np.cos(kf * phi)
    if family == "F1":
        return s * dF, 2 * kf * c * F, 2 * kf * z + 0 * phi
    if family == "F2":
        return c * dF, -2 * kf * s * F, -2 * kf * z + 0 * phi
    raise DomainError(f"unknown family {family!r}")


_ANGULAR = {"F1": eval_F1, "F2": eval_F2}


def central_difference(f, x, h, order=4):
    """Central-difference derivative of ``f`` at ``x`` with step ``h``."""
    d1 = (f(x + h) - f(x - h)) / (2 * h)
    if order == 2:
        return d1
    if order == 4:
        d2 = (f(x + 2 * h) - f(x - 2 * h)) / (4 * h)
        return (4 * d1 - d2) / 3
    raise DomainError(f"stencil order must be 2 or 4, got {order}")


def ode_residual(family, phi, k, k_a, k_b, fd_step=1e-6, order=4, precision=np.longdouble):
    """Defining-ODE residual of ``family`` with F' from a central difference.

    Returned relative to the sum of the absolute term magnitudes, so the
    value measures cancellation independently of how large F grows near
    the wedge edges.  The stencil runs in ``precision`` (long double by
    default) so the 1e-6 step is not roundoff-limited; the 2-point stencil
    is truncation-limited near the edges for k >= 2, hence ``order=4``.
    """
    F = _ANGULAR[family]
    phi = np.asarray(phi, dtype=precision)
    dF = central_difference(lambda x: F(x, k, k_a, k_b), phi, fd_step, order)
    terms = ode_terms(family, phi, k, F(phi, k, k_a, k_b), dF, k_b / 2)
    total = terms[0] + terms[1] + terms[2]
    scale = np.abs(terms[0]) + np.abs(terms[1]) + np.abs(terms[2])
    return (np.abs(total) / scale).astype(np.float64)


def _singular_rays_between(family, k, a, b):
    kf = float(as_rational(k))
    lo, hi = sorted((kf * a, kf * b))
    offset = 0.0 if family == "F1" else math.pi / 2
    # rays at k phi = offset + n pi
    n_lo = math.ceil((lo - offset) / math.pi)
    return offset + n_lo * math.pi <= hi


def f_ode_solve(z, k, phi0, F0, phi1, family="F1", rtol=1e-12, atol=1e-12):
    """Integrate the family's defining ODE from ``(phi0, F0)`` to ``phi1``.

    Uses an adaptive eighth-order Runge-Kutta step; the interval must not
    contain a singular ray.
    """
    if _singular_rays_between(family, k, phi0, phi1):
        raise DomainError(f"[{phi0}, {phi1}] crosses a singular ray of {family}")
    kf = float(as_rational(k))
    if family == "F1":
        def rhs(phi, F):
            return -(2 * kf * math.cos(kf * phi) * F + 2 * kf * z) / math.sin(kf * phi)
    elif family == "F2":
        def rhs(phi, F):
            return (2 * kf * math.sin(kf * phi) * F + 2 * kf * z) / math.cos(kf * phi)
    else:
        raise DomainError(f"unknown family {family!r}")
    if phi1 == phi0:
        return float(F0)
    sol = solve_ivp(rhs, (phi0, phi1), [F0], method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise DomainError(f"ODE integration failed: {sol.message}")
    return float(sol.y[0, -1])


def closed_form_k_a(z, k, phi0, F0, family="F1"):
    """``k_a`` of the general solution passing through ``(phi0, F0)``."""
    kf = float(as_rational(k))
    if family == "F1":
        s = math.sin(kf * phi0)
        return F0 * s * s - 2 * z * math.cos(kf * phi0)
    c = math.cos(kf * phi0)
    return F0 * c * c - 2 * z * math.sin(kf * phi0)


# ---------------------------------------------------------------------------
# potential specs


def _wedge_angle(x, y, center):
    """Polar angle in ``(center - pi, center + pi]``."""
    cc, sc = math.cos(center), math.sin(center)
    return center + np.arctan2(y * cc - x * sc, x * cc + y * sc)


@dataclass(frozen=True)
class PotentialSpec:
    """Common surface of every potential family.

    ``value_xy``/``grad_xy`` are the Cartesian potential and its gradient,
    ``value_polar`` the same potential in polar coordinates.  ``guard``
    returns a margin that drops below :data:`GUARD_ZONE` near a singular set.
    """

    kind: ClassVar[str] = ""
    wedge_center: ClassVar[float] = 0.0

    def value_polar(self, r, phi):
        return self.value_xy(r * np.cos(phi), r * np.sin(phi))

    def guard(self, x, y):
        return math.inf

    def angle(self, x, y):
        return _wedge_angle(x, y, self.wedge_center)

    def to_dict(self):
        d = {"kind": self.kind}
        for key, val in asdict(self).items():
            d[key] = str(val) if isinstance(val, Fraction) else val
        return d


@dataclass(frozen=True)
class HO(PotentialSpec):
    """Two-dimensional oscillator ``(w1^2 x^2 + w2^2 y^2) / 2``."""

    kind: ClassVar[str] = "HO"
    w1: float = 1.0
    w2: float = 1.0

    def __post_init__(self):
        if self.w1 < 0 or self.w2 < 0:
            raise DomainError("oscillator frequencies must be >= 0")

    def value_xy(self, x, y):
        return 0.5 * (self.w1**2 * x * x + self.w2**2 * y * y)

    def grad_xy(self, x, y):
        return self.w1**2 * x, self.w2**2 * y


@dataclass(frozen=True)
class GenSW(PotentialSpec):
    """Oscillator with frequency ratio n_x:n_y and inverse-square walls on both axes."""

    kind: ClassVar[str] = "GenSW"
    w0: float = 1.0
    n_x: int = 1
    n_y: int = 1
    k1: float = 0.0
    k2: float = 0.0

    def __post_init__(self):
        if self.w0 < 0:
            raise DomainError("w0 must be >= 0")
        for name in ("n_x", "n_y"):
            n = getattr(self, name)
            if int(n) != n or n < 1:
                raise DomainError(f"{name} must be a positive integer, got {n!r}")
            object.__setattr__(self, name, int(n))

    def _check(self, x, y):
        if (self.k1 and np.any(np.abs(value_of(x)) < SINGULAR_TOL)) or (
            self.k2 and np.any(np.abs(value_of(y)) < SINGULAR_TOL)
        ):
            raise SingularityError("generalized SW potential is singular on the axes")

    def value_xy(self, x, y):
        self._check(x, y)
        w2 = self.w0**2
        v = 0.5 * w2 * (self.n_x**2 * x * x + self.n_y**2 * y * y)
        if self.k1:
            v = v + self.k1 / (2 * x * x)
        if self.k2:
            v = v + self.k2 / (2 * y * y)
        return v

    def grad_xy(self, x, y):
        self._check(x, y)
        w2 = self.w0**2
        gx = w2 * self.n_x**2 * x
        gy = w2 * self.n_y**2 * y
        if self.k1:
            gx = gx - self.k1 / (x * x * x)
        if self.k2:
            gy = gy - self.k2 / (y * y * y)
        return gx, gy

    def guard(self, x, y):
        m = math.inf
        if self.k1:
            m = min(m, abs(x))
        if self.k2:
            m = min(m, abs(y))
        return m

    @property
    def wedge_center(self):
        return math.pi / 4


@dataclass(frozen=True)
class CentralPower(PotentialSpec):
    """Central power law: Hamiltonian term ``c r**m / 2``.

    The factor 1/2 matches the polar Hamiltonian convention where the
    potential ``U(r)`` enters ``J1 = 2H`` undivided.
    """

    kind: ClassVar[str] = "CentralPower"
    c: float = 1.0
    m: float = 2.0

    def U(self, r):
        return self.c * r**self.m

    def U_prime(self, r):
        return self.c * self.m * r ** (self.m - 1)

    def value_polar(self, r, phi):
        if np.any(value_of(r) <= 0):
            raise DomainError("r must be positive")
        return 0.5 * self.U(r)

    def value_xy(self, x, y):
        return self.value_polar(np.hypot(x, y), None)

    def grad_xy(self, x, y):
        r = math.hypot(x, y)
        if r == 0:
            raise SingularityError("central power gradient undefined at the origin")
        g = 0.5 * self.U_prime(r) / r
        return g * x, g * y


@dataclass(frozen=True)
class _AngularFamily(PotentialSpec):
    """``w0^2 r^2 / 2 + F(phi) / (2 r^2)``; subclasses supply F and F'."""

    w0: float = 1.0
    k: Fraction = Fraction(1)

    def __post_init__(self):
        if self.w0 < 0:
            raise DomainError("w0 must be >= 0")
        object.__setattr__(self, "k", as_rational(self.k))

    def F(self, phi):
        raise NotImplementedError

    def F_prime(self, phi):
        raise NotImplementedError

    def value_polar(self, r, phi):
        if np.any(value_of(r) <= 0):
            raise DomainError("r must be positive")
        return 0.5 * self.w0**2 * r * r + 0.5 * self.F(phi) / (r * r)

    def value_xy(self, x, y):
        return self.value_polar(np.hypot(x, y), self.angle(x, y))

    def grad_xy(self, x, y):
        r2 = x * x + y * y
        phi = self.angle(x, y)
        f = self.F(phi)
        fp = self.F_prime(phi)
        r4 = r2 * r2
        w2 = self.w0**2
        return (
            w2 * x - 0.5 * (fp * y + 2 * f * x) / r4,
            w2 * y + 0.5 * (fp * x - 2 * f * y) / r4,
        )

    @property
    def wedge(self):
        c = self.wedge_center
        h = self.wedge_half_width
        return c - h, c + h

    def _in_wedge_guard(self, x, y, trig, kf):
        phi = self.angle(x, y)
        if abs(phi - self.wedge_center) >= self.wedge_half_width:
            return 0.0
        return abs(trig(kf * phi))

    def ray_distance(self, phi):
        """Angular distance from ``phi`` to the nearest singular ray."""
        h = self.wedge_half_width
        u = np.mod(value_of(phi) - self.wedge_center + h, 2 * h)
        return h - np.abs(u - h)


@dataclass(frozen=True)
class V1(_AngularFamily):
    """First polar family, wedge ``0 < phi < pi/k``."""

    kind: ClassVar[str] = "V1"
    k_a: float = 1.0
    k_b: float = 0.0

    def F(self, phi):
        return eval_F1(phi, self.k, self.k_a, self.k_b)

    def F_prime(self, phi):
        return eval_F1_prime(phi, self.k, self.k_a, self.k_b)

    @property
    def wedge_center(self):
        return math.pi / (2 * float(self.k))

    @property
    def wedge_half_width(self):
        return math.pi / (2 * float(self.k))

    def guard(self, x, y):
        return self._in_wedge_guard(x, y, math.sin, float(self.k))

    def trig_factor(self, phi):
        return np.sin(float(self.k) * phi)


@dataclass(frozen=True)
class V2(_AngularFamily):
    """Second polar family, wedge ``|phi| < pi/(2k)``."""

    kind: ClassVar[str] = "V2"
    k_a: float = 1.0
    k_b: float = 0.0

    def F(self, phi):
        return eval_F2(phi, self.k, self.k_a, self.k_b)

    def F_prime(self, phi):
        return eval_F2_prime(phi, self.k, self.k_a, self.k_b)

    @property
    def wedge_half_width(self):
        return math.pi / (2 * float(self.k))

    def guard(self, x, y):
        return self._in_wedge_guard(x, y, math.cos, float(self.k))

    def trig_factor(self, phi):
        return np.cos(float(self.k) * phi)


@dataclass(frozen=True)
class TTW(_AngularFamily):
    """TTW barrier, wedge ``0 < phi < pi/(2k)``."""

    kind: ClassVar[str] = "TTW"
    alpha: float = 1.0
    beta: float = 1.0

    def F(self, phi):
        return ttw_angular(phi, self.k, self.alpha, self.beta)

    def F_prime(self, phi):
        return ttw_angular_prime(phi, self.k, self.alpha, self.beta)

    @property
    def wedge_center(self):
        return math.pi / (4 * float(self.k))

    @property
    def wedge_half_width(self):
        return math.pi / (4 * float(self.k))

    def guard(self, x, y):
        return self._in_wedge_guard(x, y, math.sin, 2 * float(self.k))

    def trig_factor(self, phi):
        return np.sin(2 * float(self.k) * phi)

    def to_v1(self):
        k, k_a, k_b = ttw_to_f1_params(self.k, self.alpha, self.beta)
        return V1(w0=self.w0, k=k, k_a=k_a, k_b=k_b)


FAMILIES = {cls.kind: cls for cls in (HO, GenSW, TTW, V1, V2, CentralPower)}


def potential_from_dict(d):
    """Build a spec from ``{"kind": ..., **params}``."""
    d = dict(d)
    kind = d.pop("kind", None)
    if kind not in FAMILIES:
        raise DomainError(f"unknown potential kind {kind!r}; expected one of {sorted(FAMILIES)}")
    cls = FAMILIES[kind]
    allowed = {f.name for f in cls.__dataclass_fields__.values()}
    unknown = set(d) - allowed
    if unknown:
        raise DomainError(f"unknown parameter(s) for {kind}: {sorted(unknown)}")
    return cls(**d)


def is_confining(pot) -> bool:
    """Both wedge edges repel: needs ``k_a > |k_b|`` for the F1/F2 families."""
    if isinstance(pot, (V1, V2)):
        return pot.k_a > abs(pot.k_b)
    if isinstance(pot, TTW):
        return pot.alpha > 0 and pot.beta > 0
    return True
