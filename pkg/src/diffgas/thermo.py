"""Polytropic equation of state and Riemann-invariant coordinates.

Every function here accepts either scalars or numpy arrays through the
fields of :class:`PrimitiveState`; broadcasting follows numpy rules.  The
vacuum state is ``rho == 0`` exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np


@dataclass(frozen=True)
class GasConstants:
    """Adiabatic exponent ``gamma`` and entropy scale ``gas_const``.

    ``kappa``, ``theta`` and ``lambda_exp`` are derived and cannot be set.
    """

    gamma: float
    gas_const: float
    kappa: float = field(init=False)
    theta: float = field(init=False)
    lambda_exp: float = field(init=False)

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if not self.gas_const > 0.0:
            raise ValueError(f"gas_const must be positive, got {self.gas_const}")
        g = float(self.gamma)
        object.__setattr__(self, "kappa", (g - 1.0) ** 2 / (4.0 * g))
        object.__setattr__(self, "theta", 0.5 * (g - 1.0))
        lam = (3.0 - g) / (2.0 * (g - 1.0)) if g < 3.0 else float("nan")
        object.__setattr__(self, "lambda_exp", lam)


class PrimitiveState(NamedTuple):
    rho: float | np.ndarray
    u: float | np.ndarray
    S: float | np.ndarray


class ConservedState(NamedTuple):
    rho: float | np.ndarray
    m: float | np.ndarray
    rhoS: float | np.ndarray


def _check_rho(rho):
    if np.any(np.asarray(rho) < 0.0):
        raise ValueError("density must be nonnegative")


def entropy_factor(S, k: GasConstants, power: float = 1.0):
    """``exp(power * S / gas_const)``."""
    return np.exp(power * np.asarray(S, dtype=float) / k.gas_const)


def pressure(state: PrimitiveState, k: GasConstants):
    _check_rho(state.rho)
    rho = np.asarray(state.rho, dtype=float)
    p = k.kappa * entropy_factor(state.S, k, k.gamma - 1.0) * rho**k.gamma
    return p[()] if p.ndim == 0 else p


def half_width(state: PrimitiveState, k: GasConstants):
    """``exp(theta S / gas_const) rho**theta``, i.e. ``(w - z) / 2``."""
    rho = np.asarray(state.rho, dtype=float)
    a = entropy_factor(state.S, k, k.theta) * rho**k.theta
    return a[()] if a.ndim == 0 else a


def sound_speed(state: PrimitiveState, k: GasConstants):
    """``sqrt(dp/drho)``, equal to ``theta * half_width`` for this law."""
    _check_rho(state.rho)
    return k.theta * half_width(state, k)


def riemann_invariants(state: PrimitiveState, k: GasConstants):
    _check_rho(state.rho)
    a = half_width(state, k)
    return state.u + a, state.u - a


def state_from_invariants(w, z, S, k: GasConstants) -> PrimitiveState:
    w = np.asarray(w, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(w < z):
        raise ValueError("Riemann invariants require w >= z")
    a = 0.5 * (w - z)
    rho = (a * entropy_factor(S, k, -k.theta)) ** (1.0 / k.theta)
    u = 0.5 * (w + z)
    if rho.ndim == 0:
        return PrimitiveState(float(rho), float(u), S)
    return PrimitiveState(rho, u, np.broadcast_to(S, rho.shape).astype(float))


def density_from_pressure(p, S, k: GasConstants):
    p = np.asarray(p, dtype=float)
    if np.any(p < 0.0):
        raise ValueError("pressure must be nonnegative")
    rho = (p / k.kappa) ** (1.0 / k.gamma) * entropy_factor(
        S, k, -(k.gamma - 1.0) / k.gamma
    )
    return rho[()] if rho.ndim == 0 else rho


def to_conserved(state: PrimitiveState) -> ConservedState:
    rho = np.asarray(state.rho, dtype=float)
    return ConservedState(state.rho, rho * state.u, rho * state.S)


def to_primitive(cons: ConservedState, aux_u=0.0) -> PrimitiveState:
    """Invert :func:`to_conserved`; vacuum entries take ``aux_u`` and ``S = 0``."""
    rho = np.asarray(cons.rho, dtype=float)
    _check_rho(rho)
    safe = np.where(rho > 0.0, rho, 1.0)
    u = np.where(rho > 0.0, np.asarray(cons.m) / safe, aux_u)
    S = np.where(rho > 0.0, np.asarray(cons.rhoS) / safe, 0.0)
    if rho.ndim == 0:
        return PrimitiveState(float(rho), float(u), float(S))
    return PrimitiveState(rho, u, S)
