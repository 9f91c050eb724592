"""Numerical Poisson brackets on the polar chart ``(r, phi, p_r, p_phi)``.

Two differentiation schemes are available: central finite differences with
a per-coordinate relative step, and forward-mode dual numbers (exact to
roundoff for any evaluator built from arithmetic and the supported ufuncs).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dual import Dual
from .errors import DomainError, StencilError
from .observables import (
    angular_factor,
    eval_A,
    eval_B,
    eval_J,
    eval_K,
    eval_M,
    step1_factors,
)
from .phase import PolarState, hamiltonian
from .potentials import HO, TTW, V2, CentralPower, GenSW

SCHEMES = ("central-fd", "dual")
# stencil arithmetic; "extended" is the platform long double (80-bit on x86-64)
PRECISIONS = {"double": np.float64, "extended": np.longdouble}


@dataclass(frozen=True)
class ObservableHandle:
    name: str
    evaluator: Callable[[PolarState], object]

    def __call__(self, s):
        return self.evaluator(s)


@dataclass(frozen=True)
class BracketConfig:
    fd_step: float = 1e-6
    scheme: str = "central-fd"
    # singular-value cutoff for independence_rank (rows normalized first)
    rank_tol: float = 1e-6
    precision: str = "extended"

    def __post_init__(self):
        if not 1e-12 < self.fd_step <= 1e-2:
            raise DomainError(f"fd_step must lie in (1e-12, 1e-2], got {self.fd_step}")
        if self.scheme not in SCHEMES:
            raise DomainError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.precision not in PRECISIONS:
            raise DomainError(f"precision must be one of {sorted(PRECISIONS)}, got {self.precision!r}")


DEFAULT_CONFIG = BracketConfig()


def _as_handle(f, name="f"):
    return f if isinstance(f, ObservableHandle) else ObservableHandle(name, f)


def _steps(s, cfg):
    return [cfg.fd_step * max(abs(float(v)), 1.0) for v in (s.r, s.phi, s.pr, s.pphi)]


def check_stencil(s: PolarState, pot, cfg: BracketConfig = DEFAULT_CONFIG):
    """Require ``10 * step`` of clearance from ``r = 0`` and the singular rays.

    A stencil can straddle a singular ray without any of its points landing
    on it, so the clearance is checked up front rather than by evaluation.
    """
    h_r, h_phi = _steps(s, cfg)[:2]
    if float(s.r) <= 10 * h_r:
        raise StencilError(f"r = {float(s.r):.3g} is within 10 steps of the origin")
    if pot is not None and hasattr(pot, "ray_distance"):
        d = float(pot.ray_distance(s.phi))
        if d <= 10 * h_phi:
            raise StencilError(f"phi is {d:.3g} rad from a singular ray of {pot.kind}, "
                               f"inside the 10-step clearance {10 * h_phi:.3g}")


def gradient(f, s: PolarState, cfg: BracketConfig = DEFAULT_CONFIG, pot=None):
    """Gradient of ``f`` with respect to ``(r, phi, p_r, p_phi)``.

    Finite-difference stencils use the step ``fd_step * max(|z_i|, 1)`` and
    are evaluated in ``cfg.precision`` before rounding back to double.  With
    ``pot`` given, the stencil clearance is checked first.
    """
    f = _as_handle(f)
    if cfg.scheme == "central-fd":
        check_stencil(s, pot, cfg)
    try:
        if cfg.scheme == "dual":
            z = np.array([s.r, s.phi, s.pr, s.pphi], dtype=float)
            out = f(PolarState(*Dual.seed(z), t=s.t))
            if not isinstance(out, Dual):
                return np.zeros(4)
            return np.asarray(out.grad)
        z = np.array([s.r, s.phi, s.pr, s.pphi], dtype=PRECISIONS[cfg.precision])
        g = []
        for i in range(4):
            h = cfg.fd_step * max(abs(z[i]), 1.0)
            zp = z.copy()
            zm = z.copy()
            zp[i] += h
            zm[i] -= h
            g.append((f(PolarState(*zp, t=s.t)) - f(PolarState(*zm, t=s.t))) / (2 * h))
        g = np.array(g)
        return g.astype(np.complex128 if np.iscomplexobj(g) else np.float64)
    except DomainError as exc:
        raise StencilError(f"stencil for {f.name} touches a singularity: {exc}") from exc


def _bracket_terms(gf, gg):
    return np.array(
        [gf[0] * gg[2], -gf[2] * gg[0], gf[1] * gg[3], -gf[3] * gg[1]],
    )


def poisson(f, g, s: PolarState, cfg: BracketConfig = DEFAULT_CONFIG, pot=None):
    """``{f, g}``; complex observables are handled componentwise."""
    return _bracket_terms(gradient(f, s, cfg, pot), gradient(g, s, cfg, pot)).sum()


def poisson_with_scale(f, g, s, cfg=DEFAULT_CONFIG, pot=None):
    """Bracket plus the sum of magnitudes of its four products.

    The second number is the natural size against which cancellation in the
    bracket is judged.
    """
    terms = _bracket_terms(gradient(f, s, cfg, pot), gradient(g, s, cfg, pot))
    return terms.sum(), float(np.abs(terms).sum())


# ---------------------------------------------------------------------------
# evolution laws

EVOLUTION_LAWS = ("M", "N", "N2", "K", "A_x", "B_x")


def _law(which, s, pot):
    """Observable evaluator and its claimed rate ``d/dt F = rate * F`` at ``s``."""
    if which == "A_x":
        if not isinstance(pot, HO):
            raise DomainError("A_x rate law is stated for the oscillator HO")
        return (lambda p: eval_A(p, 1, 1, pot.w1)[0]), 1j * pot.w1
    if which == "B_x":
        if not isinstance(pot, GenSW):
            raise DomainError("B_x rate law is stated for GenSW")
        return (lambda p: eval_B(p, pot)[0]), 2j * pot.n_x * pot.w0
    if which == "M":
        lam = eval_M(s, pot)[1]
        return (lambda p: eval_M(p, pot)[0]), 2j * lam
    if which in ("N", "N2"):
        if (which == "N2") != isinstance(pot, V2):
            raise DomainError("N goes with V1/TTW, N2 with V2")
        _, lam = angular_factor(s, pot)
        kk = pot.to_v1().k if isinstance(pot, TTW) else pot.k
        return (lambda p: angular_factor(p, pot)[0]), 1j * float(kk) * lam
    if which == "K":
        return (lambda p: eval_K(p, pot)), 0.0
    raise DomainError(f"unknown evolution law {which!r}; expected one of {EVOLUTION_LAWS}")


def evolution_residual(which, s, pot, cfg=DEFAULT_CONFIG, relative=True):
    """``|{F, H} - rate * F|`` for one of :data:`EVOLUTION_LAWS`.

    With ``relative=True`` (default) the residual is divided by
    ``max(1, S)`` where ``S`` is the summed magnitude of the bracket's four
    products plus ``|rate * F|``; for O(1) observables this is the absolute
    residual, for large products such as ``K`` it is the cancellation ratio.
    """
    F, rate = _law(which, s, pot)
    H = lambda p: hamiltonian(p, pot)  # noqa: E731
    br, scale = poisson_with_scale(ObservableHandle(which, F), ObservableHandle("H", H), s, cfg, pot)
    claimed = rate * F(s)
    res = abs(br - claimed)
    if relative:
        res /= max(1.0, scale + abs(claimed))
    return float(res)


def constant_residual(name, f, s, pot, cfg=DEFAULT_CONFIG, relative=True):
    """``|{f, H}|`` for a claimed constant of motion, normalized as above."""
    H = lambda p: hamiltonian(p, pot)  # noqa: E731
    br, scale = poisson_with_scale(ObservableHandle(name, f), ObservableHandle("H", H), s, cfg, pot)
    res = abs(br)
    return float(res / max(1.0, scale) if relative else res)


def step1_check(c, m, s, cfg=DEFAULT_CONFIG):
    """Residuals of the two rotation laws for a bare central power ``U = c r^m``.

    ``residual_i = |dM_i/dt - 2 lam0 M_r|`` vanishes for every ``U``;
    ``residual_r = |dM_r/dt + 2 lam0 M_i|`` vanishes iff ``r U' = 2 U``.
    """
    if s.r <= 0:
        raise DomainError("r must be positive")
    pot = CentralPower(c=c, m=m)
    H = ObservableHandle("H", lambda p: hamiltonian(p, pot))
    M_r, M_i, lam0 = step1_factors(s, pot)
    dM_r = poisson(ObservableHandle("M_r", lambda p: step1_factors(p, pot)[0]), H, s, cfg, pot)
    dM_i = poisson(ObservableHandle("M_i", lambda p: step1_factors(p, pot)[1]), H, s, cfg, pot)
    return float(abs(dM_i - 2 * lam0 * M_r)), float(abs(dM_r + 2 * lam0 * M_i))


# ---------------------------------------------------------------------------
# functional independence


def jacobian(observables, s, cfg=DEFAULT_CONFIG, pot=None):
    rows = [np.real(gradient(_as_handle(f), s, cfg, pot)) for f in observables]
    return np.vstack(rows)


def singular_values(observables, s, cfg=DEFAULT_CONFIG, pot=None):
    J = jacobian(observables, s, cfg, pot)
    norms = np.linalg.norm(J, axis=1)
    if np.any(norms == 0):
        norms = np.where(norms == 0, 1.0, norms)
    return np.linalg.svd(J / norms[:, None], compute_uv=False)


def independence_rank(observables, s, cfg=DEFAULT_CONFIG, pot=None):
    """Numerical rank of the row-normalized Jacobian of real observables."""
    return int(np.sum(singular_values(observables, s, cfg, pot) > cfg.rank_tol))


def standard_handles(pot):
    """Handles for ``J1, J2, Im K, Re K`` of a polar family."""
    return {
        "J1": ObservableHandle("J1", lambda p: eval_J(p, pot).J1),
        "J2": ObservableHandle("J2", lambda p: eval_J(p, pot).J2),
        "ImK": ObservableHandle("ImK", lambda p: np.imag(eval_K(p, pot))),
        "ReK": ObservableHandle("ReK", lambda p: np.real(eval_K(p, pot))),
    }


__all__ = [
    "BracketConfig",
    "ObservableHandle",
    "check_stencil",
    "EVOLUTION_LAWS",
    "constant_residual",
    "evolution_residual",
    "gradient",
    "independence_rank",
    "jacobian",
    "poisson",
    "poisson_with_scale",
    "singular_values",
    "standard_handles",
    "step1_check",
]

