"""Seeded random phase-space states inside a potential's domain."""
from __future__ import annotations

import math

import numpy as np

from .phase import PolarState
from .potentials import TTW, V1, V2


def wedge_states(pot, rng, n, r_range=(0.5, 2.0), p_max=1.0, edge_margin=0.1):
    """Polar states with ``phi`` in the interior of the wedge.

    ``edge_margin`` is the fraction of the half-width kept clear at each
    edge.  For non-polar families ``phi`` is drawn from the open first
    quadrant, which avoids the GenSW walls on the axes.
    """
    if isinstance(pot, (V1, V2, TTW)):
        center, half = pot.wedge_center, pot.wedge_half_width
    else:
        center, half = math.pi / 4, math.pi / 4
    half *= 1 - edge_margin
    out = []
    for _ in range(n):
        r = rng.uniform(*r_range)
        phi = center + rng.uniform(-half, half)
        pr = rng.uniform(-p_max, p_max)
        pphi = rng.uniform(-p_max, p_max)
        out.append(PolarState(r, phi, pr, pphi))
    return out


def cartesian_quadrant_states(rng, n, lo=0.3, hi=2.0, p_max=1.0):
    """Arrays ``(x, y, px, py)`` with ``x, y`` away from both axes."""
    x = rng.uniform(lo, hi, n) * rng.choice([-1.0, 1.0], n)
    y = rng.uniform(lo, hi, n) * rng.choice([-1.0, 1.0], n)
    px = rng.uniform(-p_max, p_max, n)
    py = rng.uniform(-p_max, p_max, n)
    return x, y, px, py


__all__ = ["wedge_states", "cartesian_quadrant_states"]
