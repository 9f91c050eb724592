"""Complex factors and the constants of motion built from them.

Complex quantities are plain Python/numpy complex values (or dual numbers
with complex parts).  All functions accept scalar, batched-array or dual
states.

Cartesian separable systems:
    ``A_x = p_x + i n_x w0 x``, rotating at ``i n_x w0``;
    ``B_x = p_x^2 - n_x^2 w0^2 x^2 + k1/x^2 + 2i n_x w0 x p_x``, rotating at
    ``2i n_x w0``.  Products ``A_x^{n_y} conj(A_y)^{n_x}`` and
    ``B_x^{n_y} conj(B_y)^{n_x}`` are stationary.

Polar separable systems (``H = (p_r^2 + p_phi^2/r^2)/2 + w0^2 r^2/2 + F/(2r^2)``):
    ``M`` rotates at ``2i lam``, ``N`` at ``i k lam`` with
    ``lam = sqrt(J2)/r^2``, hence ``K = M^p conj(N)^{2q}`` is stationary for
    ``k = p/q``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .dual import value_of
from .errors import DomainError
from .phase import CartesianState, PolarState, check_domain, polar_for, to_cartesian
from .potentials import HO, TTW, V1, V2, CentralPower, GenSW


def ipow(z, n: int):
    """``z**n`` for integer ``n >= 0`` by repeated squaring (no log branch)."""
    if n < 0:
        raise DomainError("negative powers are not used")
    result = None
    base = z
    while n:
        if n & 1:
            result = base if result is None else result * base
        n >>= 1
        if n:
            base = base * base
    return 1.0 + 0j if result is None else result


def _cartesian(s):
    return s if isinstance(s, CartesianState) else to_cartesian(s)


# ---------------------------------------------------------------------------
# Cartesian systems


def eval_A(s, n_x: int, n_y: int, w0: float):
    c = _cartesian(s)
    return c.px + 1j * (n_x * w0 * c.x), c.py + 1j * (n_y * w0 * c.y)


def eval_A_ij(A_x, A_y, n_x: int, n_y: int, which: str = "xy"):
    """``A_i^{n_y} conj(A_j)^{n_x}``; ``which`` picks ``(i, j)``."""
    pick = {"x": A_x, "y": A_y}
    a_i, a_j = pick[which[0]], pick[which[1]]
    return ipow(a_i, n_y) * ipow(np.conj(a_j), n_x)


def one_dof_energies(s, pot):
    """Energies of the x and y motions for HO or GenSW."""
    c = _cartesian(s)
    if isinstance(pot, HO):
        return (
            0.5 * c.px * c.px + 0.5 * pot.w1**2 * c.x * c.x,
            0.5 * c.py * c.py + 0.5 * pot.w2**2 * c.y * c.y,
        )
    if isinstance(pot, GenSW):
        w2 = pot.w0**2
        ex = 0.5 * c.px * c.px + 0.5 * pot.n_x**2 * w2 * c.x * c.x
        ey = 0.5 * c.py * c.py + 0.5 * pot.n_y**2 * w2 * c.y * c.y
        if pot.k1:
            ex = ex + pot.k1 / (2 * c.x * c.x)
        if pot.k2:
            ey = ey + pot.k2 / (2 * c.y * c.y)
        return ex, ey
    raise DomainError(f"one-dimensional energies need HO or GenSW, got {pot.kind}")


def eval_B(s, pot: GenSW):
    c = _cartesian(s)
    check_domain(c, pot)
    w0 = pot.w0
    bx = c.px * c.px - (pot.n_x * w0) ** 2 * c.x * c.x
    by = c.py * c.py - (pot.n_y * w0) ** 2 * c.y * c.y
    if pot.k1:
        bx = bx + pot.k1 / (c.x * c.x)
    if pot.k2:
        by = by + pot.k2 / (c.y * c.y)
    return (
        bx + 2j * pot.n_x * w0 * c.x * c.px,
        by + 2j * pot.n_y * w0 * c.y * c.py,
    )


def eval_B_ij(B_x, B_y, n_x: int, n_y: int, which: str = "xy"):
    """``B_i^{n_j} conj(B_j)^{n_i}``."""
    pick = {"x": (B_x, n_x), "y": (B_y, n_y)}
    (b_i, n_i), (b_j, n_j) = pick[which[0]], pick[which[1]]
    return ipow(b_i, n_j) * ipow(np.conj(b_j), n_i)


# ---------------------------------------------------------------------------
# polar systems


@dataclass(frozen=True)
class SeparationConstants:
    J1: Any
    J2: Any


@dataclass(frozen=True)
class PolarFactors:
    M: Any
    N: Any
    lam: Any


def _radial_frequency_and_F(p: PolarState, pot):
    if isinstance(pot, (V1, V2, TTW)):
        return pot.w0, pot.F(p.phi)
    if isinstance(pot, HO) and pot.w1 == pot.w2:
        return pot.w1, 0.0 * p.phi
    raise DomainError(f"separation constants need a polar-separable oscillator, got {pot.kind}")


def eval_J(s, pot) -> SeparationConstants:
    p = polar_for(s, pot)
    check_domain(p, pot)
    w0, F = _radial_frequency_and_F(p, pot)
    r2 = p.r * p.r
    J2 = p.pphi * p.pphi + F
    J1 = p.pr * p.pr + J2 / r2 + w0**2 * r2
    return SeparationConstants(J1, J2)


def _sqrt_J2(J2):
    if np.any(value_of(J2) <= 0):
        raise DomainError("J2 must be positive to take its square root")
    return np.sqrt(J2)


def eval_M(s, pot):
    """``M = (2/r) p_r sqrt(J2) + i (J1 - 2 J2 / r^2)`` and ``lam = sqrt(J2)/r^2``."""
    p = polar_for(s, pot)
    J = eval_J(p, pot)
    sj = _sqrt_J2(J.J2)
    r2 = p.r * p.r
    M = (2 / p.r) * p.pr * sj + 1j * (J.J1 - 2 * J.J2 / r2)
    return M, sj / r2, J, sj


def eval_MN(s, pot) -> PolarFactors:
    if isinstance(pot, TTW):
        pot = pot.to_v1()
    if not isinstance(pot, V1):
        raise DomainError(f"N is defined for the V1 family, got {pot.kind}")
    p = polar_for(s, pot)
    M, lam, J, sj = eval_M(p, pot)
    kf = float(pot.k)
    N = (pot.k_b / 2 + J.J2 * np.cos(kf * p.phi)) + 1j * (sj * p.pphi * np.sin(kf * p.phi))
    return PolarFactors(M, N, lam)


def eval_N2(s, pot: V2):
    """Angular factor for the V2 family.

    Obtained from N by the rotation ``phi -> phi - pi/(2k)`` that carries V2
    onto V1: ``N2 = k_b/2 + J2 sin(k phi) - i sqrt(J2) p_phi cos(k phi)``.
    """
    if not isinstance(pot, V2):
        raise DomainError(f"N2 is defined for the V2 family, got {pot.kind}")
    p = polar_for(s, pot)
    J = eval_J(p, pot)
    sj = _sqrt_J2(J.J2)
    kf = float(pot.k)
    return (pot.k_b / 2 + J.J2 * np.sin(kf * p.phi)) - 1j * (sj * p.pphi * np.cos(kf * p.phi))


def angular_factor(s, pot):
    """N for V1/TTW, N2 for V2, plus the rotation rate ``lam``."""
    if isinstance(pot, V2):
        _, lam, _, _ = eval_M(s, pot)
        return eval_N2(s, pot), lam
    f = eval_MN(s, pot)
    return f.N, f.lam


def eval_K(s, pot):
    """Higher-order constant ``M^p conj(N)^{2q}`` for ``k = p/q``.

    V2 uses N2 in place of N; TTW is evaluated through its V1 equivalent.
    """
    if isinstance(pot, TTW):
        pot = pot.to_v1()
    if isinstance(pot, V2):
        M = eval_M(s, pot)[0]
        N = eval_N2(s, pot)
    elif isinstance(pot, V1):
        f = eval_MN(s, pot)
        M, N = f.M, f.N
    else:
        raise DomainError(f"K is defined for V1, V2 and TTW, got {pot.kind}")
    p, q = pot.k.numerator, pot.k.denominator
    return ipow(M, p) * ipow(np.conj(N), 2 * q)


# ---------------------------------------------------------------------------
# central potentials


def step1_factors(s, pot: CentralPower):
    """Factors for a bare central potential ``U(r)``.

    ``M_r = (2/r) p_r p_phi``, ``M_i = p_r^2 - p_phi^2/r^2 + U`` and
    ``lam0 = p_phi / r^2``.
    """
    p = polar_for(s, pot)
    if np.any(value_of(p.r) <= 0):
        raise DomainError("r must be positive")
    r2 = p.r * p.r
    M_r = (2 / p.r) * p.pr * p.pphi
    M_i = p.pr * p.pr - p.pphi * p.pphi / r2 + pot.U(p.r)
    return M_r, M_i, p.pphi / r2


def tracked_invariants(s, pot):
    """``(H, J2, Re K, Im K)``; entries the family does not define are NaN.

    K is skipped (NaN) once ``p + 2q`` exceeds 64, where the power overflows
    any useful precision.
    """
    from .phase import hamiltonian

    H = hamiltonian(s, pot)
    nan = np.full_like(np.asarray(value_of(H), dtype=float), np.nan)
    J2 = nan
    K = nan * (1 + 1j)
    if isinstance(pot, (V1, V2, TTW)):
        J2 = eval_J(s, pot).J2
        kk = pot.to_v1().k if isinstance(pot, TTW) else pot.k
        if kk.numerator + 2 * kk.denominator <= 64 and np.all(value_of(J2) > 0):
            K = eval_K(s, pot)
    elif isinstance(pot, (HO, CentralPower)) and (not isinstance(pot, HO) or pot.w1 == pot.w2):
        p = polar_for(s, pot)
        J2 = p.pphi * p.pphi
    return H, J2, np.real(K), np.imag(K)
