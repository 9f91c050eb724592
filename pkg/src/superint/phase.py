"""Phase-space states, canonical chart changes and Hamilton's equations.

Mass is fixed to one, so momenta double as velocities.  State fields may be
floats, numpy arrays (batched evaluation) or dual numbers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dual import value_of
from .errors import DomainError, SingularityError
from .potentials import GUARD_ZONE, TTW, V1, V2, GenSW, PotentialSpec

# evaluation refuses states this close to a singular ray (radians or length)
SINGULARITY_DELTA = 1e-9


@dataclass(frozen=True)
class CartesianState:
    x: float
    y: float
    px: float
    py: float
    t: float = 0.0

    def as_array(self):
        return np.array([self.x, self.y, self.px, self.py], dtype=float)

    @classmethod
    def from_array(cls, a, t=0.0):
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]), t)


@dataclass(frozen=True)
class PolarState:
    r: float
    phi: float
    pr: float
    pphi: float
    t: float = 0.0

    def as_array(self):
        return np.array([self.r, self.phi, self.pr, self.pphi], dtype=float)

    @classmethod
    def from_array(cls, a, t=0.0):
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]), t)


def _all_finite(*vals):
    return all(np.all(np.isfinite(value_of(v))) for v in vals)


def to_cartesian(s: PolarState) -> CartesianState:
    if not _all_finite(s.r, s.phi, s.pr, s.pphi):
        raise DomainError("non-finite polar state")
    if np.any(value_of(s.r) <= 0):
        raise DomainError("polar state needs r > 0")
    c, sn = np.cos(s.phi), np.sin(s.phi)
    w = s.pphi / s.r
    return CartesianState(s.r * c, s.r * sn, s.pr * c - w * sn, s.pr * sn + w * c, s.t)


def to_polar(s: CartesianState, center: float = 0.0) -> PolarState:
    """Inverse of :func:`to_cartesian`; ``phi`` lands in ``(center - pi, center + pi]``."""
    if not _all_finite(s.x, s.y, s.px, s.py):
        raise DomainError("non-finite Cartesian state")
    r = np.hypot(s.x, s.y)
    if np.any(value_of(r) == 0):
        raise DomainError("the origin has no polar representation")
    if center == 0.0:
        phi = np.arctan2(s.y, s.x)
    else:
        cc, sc = math.cos(center), math.sin(center)
        phi = center + np.arctan2(s.y * cc - s.x * sc, s.x * cc + s.y * sc)
    pr = (s.x * s.px + s.y * s.py) / r
    pphi = s.x * s.py - s.y * s.px
    return PolarState(r, phi, pr, pphi, s.t)


def polar_for(s, pot: PotentialSpec) -> PolarState:
    """Polar view of ``s`` with the angle placed in ``pot``'s wedge."""
    if isinstance(s, PolarState):
        return s
    return to_polar(s, center=pot.wedge_center)


def check_domain(s, pot: PotentialSpec):
    """Raise :class:`SingularityError` if ``s`` is within the singularity delta."""
    if isinstance(pot, (V1, V2, TTW)):
        p = polar_for(s, pot)
        if np.any(np.abs(value_of(pot.trig_factor(p.phi))) < SINGULARITY_DELTA):
            raise SingularityError(f"state lies on a singular ray of {pot.kind}")
    elif isinstance(pot, GenSW):
        c = s if isinstance(s, CartesianState) else to_cartesian(s)
        if (pot.k1 and np.any(np.abs(value_of(c.x)) < SINGULARITY_DELTA)) or (
            pot.k2 and np.any(np.abs(value_of(c.y)) < SINGULARITY_DELTA)
        ):
            raise SingularityError("state lies on a coordinate axis of GenSW")


def kinetic(s):
    if isinstance(s, PolarState):
        return 0.5 * (s.pr * s.pr + s.pphi * s.pphi / (s.r * s.r))
    return 0.5 * (s.px * s.px + s.py * s.py)


def hamiltonian(s, pot: PotentialSpec):
    """Kinetic plus potential energy, evaluated in whichever chart ``s`` uses."""
    check_domain(s, pot)
    if isinstance(s, PolarState):
        return kinetic(s) + pot.value_polar(s.r, s.phi)
    return kinetic(s) + pot.value_xy(s.x, s.y)


def eom(s: CartesianState, pot: PotentialSpec):
    """Hamilton's vector field ``(dx, dy, dpx, dpy)`` at ``s``."""
    check_domain(s, pot)
    gx, gy = pot.grad_xy(s.x, s.y)
    return np.array([s.px, s.py, -gx, -gy], dtype=float)


def fd_gradient_xy(pot: PotentialSpec, x, y, step=1e-6):
    """Central-difference gradient of the potential; a test oracle only."""
    hx = step * max(abs(x), 1.0)
    hy = step * max(abs(y), 1.0)
    gx = (pot.value_xy(x + hx, y) - pot.value_xy(x - hx, y)) / (2 * hx)
    gy = (pot.value_xy(x, y + hy) - pot.value_xy(x, y - hy)) / (2 * hy)
    return gx, gy


def in_guard_zone(x, y, pot: PotentialSpec) -> bool:
    return pot.guard(x, y) < GUARD_ZONE
