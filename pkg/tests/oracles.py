"""Independent reference implementations used only by the tests.

None of these import the package's solver code; they rebuild the physics
from the pressure law, the Rankine-Hugoniot relations and the heat kernel.
"""
from __future__ import annotations

import numpy as np


def kappa(gamma):
    return (gamma - 1.0) ** 2 / (4.0 * gamma)


def pressure(rho, S, gamma, K=1.0):
    return kappa(gamma) * np.exp((gamma - 1.0) * S / K) * rho**gamma


def rho_from_p(p, S, gamma, K=1.0):
    # invert p = kappa e^{(gamma-1) S/K} rho^gamma directly
    return (p / (kappa(gamma) * np.exp((gamma - 1.0) * S / K))) ** (1.0 / gamma)


def half_width(rho, S, gamma, K=1.0):
    th = 0.5 * (gamma - 1.0)
    return np.exp(th * S / K) * rho**th


def _curve(rho, rho_ref, u_ref, S, gamma, K, sign):
    """Velocity on the 1-curve (sign=-1) or backward 3-curve (sign=+1)."""
    p_ref = pressure(rho_ref, S, gamma, K)
    p = pressure(rho, S, gamma, K)
    rare = half_width(rho, S, gamma, K) - half_width(rho_ref, S, gamma, K)
    jump = np.sqrt(np.maximum((p - p_ref) * (rho - rho_ref) / (rho * rho_ref), 0.0))
    return u_ref + sign * np.where(rho <= rho_ref, rare, jump)


def bisect_star_pressure(left, right, gamma, K=1.0, iters=400):
    """``p*`` by bisection in ``log p``; arrays of problems are fine."""
    rl, ul, sl = (np.asarray(v, dtype=float) for v in left)
    rr, ur, sr = (np.asarray(v, dtype=float) for v in right)

    def mismatch(logp):
        p = np.exp(logp)
        a = _curve(rho_from_p(p, sl, gamma, K), rl, ul, sl, gamma, K, -1.0)
        b = _curve(rho_from_p(p, sr, gamma, K), rr, ur, sr, gamma, K, +1.0)
        return a - b

    lo = np.full(np.broadcast(rl, rr).shape, -700.0)
    hi = np.full_like(lo, 200.0)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        pos = mismatch(mid) > 0.0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
    return np.exp(0.5 * (lo + hi))


def vacuum_forms(left, right, gamma, K=1.0):
    """True where the data generate vacuum: ``u_l + A_l <= u_r - A_r``."""
    rl, ul, sl = left
    rr, ur, sr = right
    return ul + half_width(rl, sl, gamma, K) <= ur - half_width(rr, sr, gamma, K)


# -- isentropic p-system Godunov reference ------------------------------------

def _psys_curve(rho, rho_ref, u_ref, c, gamma, sign):
    th = 0.5 * (gamma - 1.0)
    kap = kappa(gamma) * c
    p_ref = kap * rho_ref**gamma
    p = kap * rho**gamma
    # rarefaction: the opposite invariant u -/+ sqrt(kap gamma)/th rho^th is constant
    coef = np.sqrt(kap * gamma) / th
    rare = coef * (rho**th - rho_ref**th)
    jump = np.sqrt(np.maximum((p - p_ref) * (rho - rho_ref) / (rho * rho_ref), 0.0))
    return u_ref + sign * np.where(rho <= rho_ref, rare, jump)


def psystem_interface_flux(rl, ul, rr, ur, gamma, c, iters=200):
    """Godunov flux of ``rho_t + m_x = 0, m_t + (m^2/rho + p)_x = 0`` with
    ``p = kappa c rho^gamma``, from an exact solve by bisection on ``rho*``."""
    th = 0.5 * (gamma - 1.0)
    kap = np.broadcast_to(kappa(gamma) * np.asarray(c, dtype=float), np.shape(rl))
    cs = np.sqrt(kap * gamma)
    coef = cs / th

    def snd(r):
        return cs * r**th

    lo = np.zeros_like(rl)
    hi = np.maximum(rl, rr) * 2.0 + 1.0
    grow = _psys_curve(hi, rl, ul, c, gamma, -1) - _psys_curve(hi, rr, ur, c, gamma, +1) > 0
    while grow.any():
        hi = np.where(grow, hi * 4.0, hi)
        grow = _psys_curve(hi, rl, ul, c, gamma, -1) - _psys_curve(hi, rr, ur, c, gamma, +1) > 0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        pos = _psys_curve(mid, rl, ul, c, gamma, -1) - _psys_curve(mid, rr, ur, c, gamma, +1) > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
    rs = 0.5 * (lo + hi)
    us = _psys_curve(rs, rl, ul, c, gamma, -1)

    # state on x/t = 0
    rho = np.empty_like(rl)
    u = np.empty_like(rl)
    # left wave
    shock1 = rs > rl
    s1 = np.where(shock1, (rs * us - rl * ul) / np.where(rs != rl, rs - rl, 1.0), ul - snd(rl))
    head1 = np.where(shock1, s1, ul - snd(rl))
    tail1 = np.where(shock1, s1, us - snd(rs))
    shock3 = rs > rr
    s3 = np.where(shock3, (rr * ur - rs * us) / np.where(rs != rr, rr - rs, 1.0), ur + snd(rr))
    head3 = np.where(shock3, s3, ur + snd(rr))
    tail3 = np.where(shock3, s3, us + snd(rs))
    w_l = ul + coef * rl**th
    z_r = ur - coef * rr**th
    # inside a fan at x/t = 0: u -/+ c = 0 with the other invariant fixed
    for i in range(rl.size):
        if 0.0 < head1[i]:
            rho[i], u[i] = rl[i], ul[i]
        elif 0.0 < tail1[i]:
            # 1-fan: u - c = 0 and u + coef rho^th = w_l
            r = (w_l[i] / (coef[i] + cs[i])) ** (1.0 / th)
            rho[i], u[i] = r, cs[i] * r**th
        elif 0.0 < tail3[i]:
            rho[i], u[i] = rs[i], us[i]
        elif 0.0 < head3[i]:
            r = (-z_r[i] / (coef[i] + cs[i])) ** (1.0 / th)
            rho[i], u[i] = r, -cs[i] * r**th
        else:
            rho[i], u[i] = rr[i], ur[i]
    m = rho * u
    return m, m * u + kap * rho**gamma


def psystem_godunov_step(rho, m, dt, dx, gamma, c):
    """One periodic Godunov step of the isentropic p-system."""
    u = m / rho
    rl = np.concatenate([rho[-1:], rho])
    ul = np.concatenate([u[-1:], u])
    rr = np.concatenate([rho, rho[:1]])
    ur = np.concatenate([u, u[:1]])
    f_rho, f_m = psystem_interface_flux(rl, ul, rr, ur, gamma, c)
    f_rho[-1], f_m[-1] = f_rho[0], f_m[0]
    lam = dt / dx
    return rho - lam * np.diff(f_rho), m - lam * np.diff(f_m)


# -- heat kernel ---------------------------------------------------------------

def heat_by_gauss_hermite(func, y, t, n=120):
    """``int func(y - z) G_t(z) dz`` with the Gaussian of variance ``2t``."""
    s, w = np.polynomial.hermite.hermgauss(n)
    return float(np.sum(w * func(y - 2.0 * np.sqrt(t) * s)) / np.sqrt(np.pi))
