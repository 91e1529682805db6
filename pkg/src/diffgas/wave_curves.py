"""Slow (1-) and backward fast (3-) wave curves in the (rho, u) plane.

Both curves hold the entropy of their reference state fixed.  The rarefaction
branch keeps the opposite Riemann invariant constant; the shock branch is the
Rankine-Hugoniot locus ``(u - u_ref)**2 = (p - p_ref) (1/rho_ref - 1/rho)``.
"""
from __future__ import annotations

import numpy as np

from .thermo import GasConstants, PrimitiveState, entropy_factor

# below this relative distance from the reference density the shock branch
# is replaced by the (C1-matching) rarefaction branch
_BRANCH_GUARD = 1e-8


def _rarefaction_delta(rho, ref: PrimitiveState, k: GasConstants):
    return entropy_factor(ref.S, k, k.theta) * (rho**k.theta - ref.rho**k.theta)


def _shock_delta(rho, ref: PrimitiveState, k: GasConstants):
    """Nonnegative velocity jump magnitude along the Hugoniot locus."""
    rho_ref = np.asarray(ref.rho, dtype=float)
    safe = np.where(rho > 0.0, rho, 1.0)
    radicand = (rho**k.gamma - rho_ref**k.gamma) * (rho - rho_ref) / (safe * rho_ref)
    radicand = np.maximum(radicand, 0.0)
    return np.sqrt(k.kappa) * entropy_factor(ref.S, k, k.theta) * np.sqrt(radicand)


def _branches(rho, ref: PrimitiveState, k: GasConstants):
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0.0):
        raise ValueError("density must be nonnegative")
    if np.any(np.asarray(ref.rho) <= 0.0):
        raise ValueError("reference density must be positive")
    rare = _rarefaction_delta(rho, ref, k)
    near = np.abs(rho / ref.rho - 1.0) < _BRANCH_GUARD
    shock = np.where(near, rare, _shock_delta(rho, ref, k))
    return rho, rare, shock


def slow_wave_u(rho, left: PrimitiveState, k: GasConstants):
    """Velocity on the 1-wave curve through ``left`` at density ``rho``.

    Strictly decreasing in ``rho``; ``rho = 0`` gives the vacuum-edge
    velocity ``w(left)``.
    """
    rho, rare, shock = _branches(rho, left, k)
    u = left.u - np.where(rho <= left.rho, rare, shock)
    return u[()] if u.ndim == 0 else u


def fast_wave_backward_u(rho, right: PrimitiveState, k: GasConstants):
    """Velocity of states connectable to ``right`` from the left by a 3-wave.

    Strictly increasing in ``rho``; ``rho = 0`` gives ``z(right)``.
    """
    rho, rare, shock = _branches(rho, right, k)
    u = right.u + np.where(rho <= right.rho, rare, shock)
    return u[()] if u.ndim == 0 else u


def shock_speed(left: PrimitiveState, right_rho, k: GasConstants):
    """Mass-conservation speed of the 1-shock from ``left`` to ``right_rho``."""
    right_rho = np.asarray(right_rho, dtype=float)
    d_rho = right_rho - left.rho
    if np.any(d_rho == 0.0):
        raise ValueError("shock speed undefined for equal densities")
    u_r = slow_wave_u(right_rho, left, k)
    s = (right_rho * u_r - left.rho * left.u) / d_rho
    return s[()] if np.ndim(s) == 0 else s
