"""Exact Riemann solver for the 3x3 system with entropy carried as a contact.

The fan is a 1-wave at the left entropy, a contact across which ``u`` and
``p`` are continuous, and a 3-wave at the right entropy.  The star pressure
solves ``u1(rho_l*(p)) = u3~(rho_r*(p))`` by safeguarded Newton iteration in
``log p``.  All routines operate on batches: the fields of the input states
may be arrays of equal shape, one entry per Riemann problem.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .thermo import (
    GasConstants,
    PrimitiveState,
    density_from_pressure,
    entropy_factor,
    pressure,
    sound_speed,
)
from .wave_curves import fast_wave_backward_u, slow_wave_u

TOL = 1e-12
MAX_ITER = 100
# star densities within this relative distance of the data count as zero-strength rarefactions
TIE_TOL = 1e-14


class WaveKind(str, Enum):
    NONE = "none"
    SHOCK = "shock"
    RAREFACTION = "rarefaction"


_KINDS = (WaveKind.NONE, WaveKind.SHOCK, WaveKind.RAREFACTION)
NONE, SHOCK, RAREFACTION = 0, 1, 2


class RiemannSolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class RiemannFan:
    """Wave structure of one or many Riemann problems.

    ``wave_speeds`` holds, along its last axis, the 1-wave head and tail, the
    contact speed, and the 3-wave tail and head (a shock has head == tail).
    In a vacuum fan the contact slot holds the midpoint of the vacuum edges
    ``vac_u_left``/``vac_u_right``, which bound the vacuum region in ``x/t``.
    """

    left: PrimitiveState
    right: PrimitiveState
    p_star: np.ndarray
    u_star: np.ndarray
    rho_left_star: np.ndarray
    rho_right_star: np.ndarray
    kind1: np.ndarray
    kind3: np.ndarray
    wave_speeds: np.ndarray
    vacuum: np.ndarray
    vac_u_left: np.ndarray
    vac_u_right: np.ndarray

    @property
    def size(self) -> int:
        return int(np.size(self.p_star))

    @property
    def wave1_kind(self):
        return _kind_names(self.kind1)

    @property
    def wave3_kind(self):
        return _kind_names(self.kind3)

    @property
    def star_densities(self):
        return self.rho_left_star, self.rho_right_star

    def at(self, i: int) -> "RiemannFan":
        """The ``i``-th problem of a batch, with scalar fields."""

        def pick(a):
            return np.asarray(a)[..., i][()] if np.ndim(a) else a

        return RiemannFan(
            left=PrimitiveState(*(float(pick(v)) for v in self.left)),
            right=PrimitiveState(*(float(pick(v)) for v in self.right)),
            p_star=float(pick(self.p_star)),
            u_star=float(pick(self.u_star)),
            rho_left_star=float(pick(self.rho_left_star)),
            rho_right_star=float(pick(self.rho_right_star)),
            kind1=int(pick(self.kind1)),
            kind3=int(pick(self.kind3)),
            wave_speeds=np.asarray(self.wave_speeds)[i].copy(),
            vacuum=bool(pick(self.vacuum)),
            vac_u_left=float(pick(self.vac_u_left)),
            vac_u_right=float(pick(self.vac_u_right)),
        )


def _kind_names(codes):
    if np.ndim(codes) == 0:
        return _KINDS[int(codes)]
    return [_KINDS[int(c)] for c in np.ravel(codes)]


def _as_batch(state: PrimitiveState, n: int) -> PrimitiveState:
    return PrimitiveState(
        *(np.broadcast_to(np.asarray(v, dtype=float), (n,)).copy() for v in state)
    )


def _pow_ratio(a, b, gamma):
    """``(a**gamma - b**gamma) / (a - b)`` without cancellation, ``b > 0``."""
    d = (a - b) / b
    small = np.abs(d) < 1e-300
    d_safe = np.where(small, 1.0, d)
    q = np.expm1(gamma * np.log1p(d_safe)) / d_safe
    return b ** (gamma - 1.0) * np.where(small, gamma, q)


def _shock_speed(state: PrimitiveState, rho_star, k: GasConstants, sign: float):
    """Speed of the shock joining ``state`` to density ``rho_star``.

    ``sign = -1`` for the 1-family, ``+1`` for the 3-family.
    """
    rho = state.rho
    dp_drho = k.kappa * entropy_factor(state.S, k, k.gamma - 1.0) * _pow_ratio(
        rho_star, rho, k.gamma
    )
    return state.u + sign * np.sqrt(rho_star * dp_drho / rho)


def _log_slope(rho, ref: PrimitiveState, k: GasConstants):
    """``rho * |du/drho|`` along the wave curve through ``ref``."""
    a = entropy_factor(ref.S, k, k.theta)
    rare = k.theta * a * rho**k.theta
    inv = 1.0 / ref.rho - 1.0 / rho
    diff = rho**k.gamma - ref.rho**k.gamma
    radicand = diff * inv
    with np.errstate(divide="ignore", invalid="ignore"):
        shock = (
            np.sqrt(k.kappa)
            * a
            * (k.gamma * rho**k.gamma * inv + diff / rho)
            / (2.0 * np.sqrt(radicand))
        )
    use_shock = (rho > ref.rho * (1.0 + 1e-8)) & (radicand > 0.0)
    return np.where(use_shock, shock, rare)


def _mismatch(s, left, right, k):
    p = np.exp(s)
    rl = density_from_pressure(p, left.S, k)
    rr = density_from_pressure(p, right.S, k)
    phi = slow_wave_u(rl, left, k) - fast_wave_backward_u(rr, right, k)
    dphi = -(_log_slope(rl, left, k) + _log_slope(rr, right, k)) / k.gamma
    return phi, dphi


def _star_pressure(left, right, k, w_l, z_r, a_l, a_r):
    """Solve for ``log p*`` on nonvacuum, non-vacuum-generating problems."""
    n = left.rho.size
    if n == 0:
        return np.zeros(0)
    # two-rarefaction pressure: exact when both extreme waves are rarefactions
    denom = entropy_factor(left.S, k, k.theta / k.gamma) + entropy_factor(
        right.S, k, k.theta / k.gamma
    )
    p_tr = k.kappa * ((w_l - z_r) / denom) ** (k.gamma / k.theta)
    p_l, p_r = pressure(left, k), pressure(right, k)
    s = np.log(p_tr)
    scale = np.maximum.reduce([np.abs(left.u), np.abs(right.u), a_l, a_r])

    lo = s - 40.0
    for _ in range(50):
        phi, _d = _mismatch(lo, left, right, k)
        bad = phi <= 0.0
        if not bad.any():
            break
        lo = np.where(bad, lo - 40.0, lo)
    hi = np.log(np.maximum.reduce([p_tr, p_l, p_r])) + 1.0
    for _ in range(200):
        phi, _d = _mismatch(hi, left, right, k)
        bad = phi >= 0.0
        if not bad.any():
            break
        hi = np.where(bad, hi + 2.0, hi)

    active = np.ones(n, dtype=bool)
    for _ in range(MAX_ITER):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        sub_l = PrimitiveState(*(v[idx] for v in left))
        sub_r = PrimitiveState(*(v[idx] for v in right))
        si = s[idx]
        phi, dphi = _mismatch(si, sub_l, sub_r, k)
        lo[idx] = np.where(phi > 0.0, si, lo[idx])
        hi[idx] = np.where(phi < 0.0, si, hi[idx])
        with np.errstate(divide="ignore", invalid="ignore"):
            step = -phi / dphi
        # converged before any bracket fallback: a sub-ulp step may land on lo/hi
        converged = (phi == 0.0) | (
            (np.abs(phi) <= TOL * scale[idx])
            & (np.abs(step) <= 1e-13 * np.maximum(1.0, np.abs(si)))
        )
        new = si + step
        outside = ~np.isfinite(new) | (new <= lo[idx]) | (new >= hi[idx])
        new = np.where(outside, 0.5 * (lo[idx] + hi[idx]), new)
        s[idx] = np.where(converged, si, new)
        done = converged | (hi[idx] - lo[idx] <= 4e-16 * np.maximum(1.0, np.abs(si)))
        active[idx[done]] = False

    phi, _d = _mismatch(s, left, right, k)
    if np.any(~(np.abs(phi) <= TOL * scale)):
        raise RiemannSolverError(
            f"star-pressure iteration failed; max residual {np.nanmax(np.abs(phi) / scale):.3e}"
        )
    return s


def solve_batch(left: PrimitiveState, right: PrimitiveState, k: GasConstants) -> RiemannFan:
    """Solve a batch of Riemann problems; state fields broadcast to 1-D."""
    n = int(np.broadcast(*(np.asarray(v) for v in (*left, *right))).size)
    left = _as_batch(left, n)
    right = _as_batch(right, n)
    for st in (left, right):
        if np.any(~np.isfinite(st.rho)) or np.any(st.rho < 0.0):
            raise ValueError("Riemann data must have finite nonnegative density")
        if np.any(~np.isfinite(st.u)) or np.any(~np.isfinite(st.S)):
            raise ValueError("Riemann data must be finite")

    a_l = entropy_factor(left.S, k, k.theta) * left.rho**k.theta
    a_r = entropy_factor(right.S, k, k.theta) * right.rho**k.theta
    w_l, z_r = left.u + a_l, right.u - a_r
    c_l, c_r = k.theta * a_l, k.theta * a_r
    lvac, rvac = left.rho == 0.0, right.rho == 0.0

    # vacuum iff the curves only meet at p = 0
    vacuum = lvac | rvac | (w_l <= z_r)
    solve_idx = np.flatnonzero(~vacuum)

    p_star = np.zeros(n)
    u_star = np.zeros(n)
    rls = np.zeros(n)
    rrs = np.zeros(n)
    kind1 = np.full(n, NONE, dtype=np.int8)
    kind3 = np.full(n, NONE, dtype=np.int8)
    speeds = np.zeros((n, 5))
    vac_lo = np.zeros(n)
    vac_hi = np.zeros(n)

    if solve_idx.size:
        sl = PrimitiveState(*(v[solve_idx] for v in left))
        sr = PrimitiveState(*(v[solve_idx] for v in right))
        s = _star_pressure(sl, sr, k, w_l[solve_idx], z_r[solve_idx], a_l[solve_idx], a_r[solve_idx])
        ps = np.exp(s)
        rl = density_from_pressure(ps, sl.S, k)
        rr = density_from_pressure(ps, sr.S, k)
        us = 0.5 * (slow_wave_u(rl, sl, k) + fast_wave_backward_u(rr, sr, k))
        shock1 = rl > sl.rho * (1.0 + TIE_TOL)
        shock3 = rr > sr.rho * (1.0 + TIE_TOL)
        with np.errstate(divide="ignore", invalid="ignore"):
            s1 = _shock_speed(sl, rl, k, -1.0)
            s3 = _shock_speed(sr, rr, k, +1.0)
        cls_ = sound_speed(PrimitiveState(rl, us, sl.S), k)
        crs = sound_speed(PrimitiveState(rr, us, sr.S), k)
        sp = np.empty((solve_idx.size, 5))
        sp[:, 0] = np.where(shock1, s1, sl.u - c_l[solve_idx])
        sp[:, 1] = np.where(shock1, s1, us - cls_)
        sp[:, 2] = us
        sp[:, 3] = np.where(shock3, s3, us + crs)
        sp[:, 4] = np.where(shock3, s3, sr.u + c_r[solve_idx])
        p_star[solve_idx] = ps
        u_star[solve_idx] = us
        rls[solve_idx] = rl
        rrs[solve_idx] = rr
        kind1[solve_idx] = np.where(shock1, SHOCK, RAREFACTION)
        kind3[solve_idx] = np.where(shock3, SHOCK, RAREFACTION)
        speeds[solve_idx] = sp
        vac_lo[solve_idx] = us
        vac_hi[solve_idx] = us

    vac_idx = np.flatnonzero(vacuum)
    if vac_idx.size:
        lv, rv = lvac[vac_idx], rvac[vac_idx]
        wl, zr = w_l[vac_idx], z_r[vac_idx]
        ul, ur = left.u[vac_idx], right.u[vac_idx]
        # vacuum edge velocities; a vacuum side contributes its auxiliary velocity
        lo = np.where(lv, np.where(rv, ul, np.minimum(ul, zr)), wl)
        hi = np.where(rv, np.where(lv, ur, np.maximum(ur, wl)), zr)
        # colliding auxiliary velocities of two vacuum states: zero-width region
        mid = 0.5 * (lo + hi)
        collapse = lo > hi
        lo = np.where(collapse, mid, lo)
        hi = np.where(collapse, mid, hi)
        sp = np.empty((vac_idx.size, 5))
        sp[:, 0] = np.where(lv, lo, ul - c_l[vac_idx])
        sp[:, 1] = lo
        sp[:, 2] = 0.5 * (lo + hi)
        sp[:, 3] = hi
        sp[:, 4] = np.where(rv, hi, ur + c_r[vac_idx])
        speeds[vac_idx] = sp
        kind1[vac_idx] = np.where(lv, NONE, RAREFACTION)
        kind3[vac_idx] = np.where(rv, NONE, RAREFACTION)
        u_star[vac_idx] = 0.5 * (lo + hi)
        vac_lo[vac_idx] = lo
        vac_hi[vac_idx] = hi

    return RiemannFan(
        left=left,
        right=right,
        p_star=p_star,
        u_star=u_star,
        rho_left_star=rls,
        rho_right_star=rrs,
        kind1=kind1,
        kind3=kind3,
        wave_speeds=speeds,
        vacuum=vacuum,
        vac_u_left=vac_lo,
        vac_u_right=vac_hi,
    )


def solve(left: PrimitiveState, right: PrimitiveState, k: GasConstants) -> RiemannFan:
    """Solve a single Riemann problem; the returned fan has scalar fields."""
    if any(np.ndim(v) for v in (*left, *right)):
        raise ValueError("solve() takes scalar states; use solve_batch for arrays")
    return solve_batch(left, right, k).at(0)


def sample(fan: RiemannFan, xi, k: GasConstants) -> PrimitiveState:
    """State of the self-similar solution on the ray ``x/t = xi``.

    For a batch fan, ``xi`` broadcasts against the batch axis (a leading
    axis of rays is allowed: ``xi`` of shape ``(m, n)`` or ``(m, 1)``).
    """
    xi = np.asarray(xi, dtype=float)
    sp = np.asarray(fan.wave_speeds, dtype=float)
    h1, t1, c, t3, h3 = (sp[..., j] for j in range(5))
    L, R = fan.left, fan.right
    th = k.theta

    # rarefaction interiors: the opposite-family invariant is constant
    a_l = entropy_factor(L.S, k, th) * np.asarray(L.rho, dtype=float) ** th
    a_r = entropy_factor(R.S, k, th) * np.asarray(R.rho, dtype=float) ** th
    w_l = L.u + a_l
    z_r = R.u - a_r
    a1 = np.maximum((w_l - xi) / (1.0 + th), 0.0)
    a3 = np.maximum((xi - z_r) / (1.0 + th), 0.0)
    rho1 = (a1 * entropy_factor(L.S, k, -th)) ** (1.0 / th)
    rho3 = (a3 * entropy_factor(R.S, k, -th)) ** (1.0 / th)

    vac = np.asarray(fan.vacuum)
    u_vac = np.clip(xi, fan.vac_u_left, fan.vac_u_right)
    shape = np.broadcast(xi, h1).shape
    bl = lambda v: np.broadcast_to(v, shape)  # noqa: E731

    in_left = xi < h1
    in_fan1 = xi < t1
    in_lstar = xi < c
    in_rstar = xi < t3
    in_fan3 = xi < h3

    # inside a vacuum fan the contact slot splits the vacuum region
    rho = np.select(
        [in_left, in_fan1, in_rstar & vac, in_lstar, in_rstar, in_fan3],
        [bl(L.rho), rho1, 0.0, bl(fan.rho_left_star), bl(fan.rho_right_star), rho3],
        default=bl(R.rho),
    )
    u = np.select(
        [in_left, in_fan1, in_rstar & vac, in_rstar, in_fan3],
        [bl(L.u), w_l - a1, u_vac, bl(fan.u_star), z_r + a3],
        default=bl(R.u),
    )
    S = np.select(
        [in_left, in_fan1, in_rstar & vac, in_lstar],
        [bl(L.S), bl(L.S), 0.0, bl(L.S)],
        default=bl(R.S),
    )
    S = np.where(rho == 0.0, np.where(xi < c, L.S, R.S), S)
    if rho.ndim == 0:
        return PrimitiveState(float(rho), float(u), float(S))
    return PrimitiveState(rho, u, S)


def max_wave_speed(fan: RiemannFan, k: GasConstants):
    """Largest ``|u -/+ c|`` over the states of the fan, shock speeds included.

    Auxiliary velocities carried by vacuum data do not count; a vacuum edge
    adjacent to gas does (it is a rarefaction tail).
    """
    sp = np.asarray(fan.wave_speeds)
    left_gas = np.asarray(fan.left.rho) > 0.0
    right_gas = np.asarray(fan.right.rho) > 0.0
    best = np.zeros(np.shape(fan.p_star))
    best = np.where(fan.kind1 == SHOCK, np.abs(sp[..., 0]), best)
    best = np.maximum(best, np.where(fan.kind3 == SHOCK, np.abs(sp[..., 4]), 0.0))
    vac = np.asarray(fan.vacuum)
    best = np.maximum(best, np.where(vac & left_gas, np.abs(fan.vac_u_left), 0.0))
    best = np.maximum(best, np.where(vac & right_gas, np.abs(fan.vac_u_right), 0.0))
    states = [
        fan.left,
        fan.right,
        PrimitiveState(fan.rho_left_star, fan.u_star, fan.left.S),
        PrimitiveState(fan.rho_right_star, fan.u_star, fan.right.S),
    ]
    for st in states:
        c = sound_speed(st, k)
        gas = np.asarray(st.rho) > 0.0
        lam = np.maximum(np.abs(st.u - c), np.abs(st.u + c))
        best = np.maximum(best, np.where(gas, lam, 0.0))
    return best[()] if np.ndim(best) == 0 else best


def contact_jump_invariants(fan: RiemannFan, k: GasConstants):
    """``(w, z)`` immediately left and right of the contact."""
    if np.any(fan.vacuum):
        raise ValueError("vacuum fan has no contact discontinuity")
    base = (np.asarray(fan.p_star) / k.kappa) ** (k.theta / k.gamma)
    a_left = base * entropy_factor(fan.left.S, k, k.theta / k.gamma)
    a_right = base * entropy_factor(fan.right.S, k, k.theta / k.gamma)
    u = fan.u_star
    return u + a_left, u - a_left, u + a_right, u - a_right


def reentropize_invariants(w, z, S_from, S_to, k: GasConstants):
    """Invariants of the state with the same ``u`` and ``p`` but entropy ``S_to``.

    This is the barred curve used to locate the contact: the sum ``w + z``
    is kept and ``w - z`` is multiplied by ``exp(theta (S_to - S_from) / (gamma K))``.
    """
    e = entropy_factor(np.asarray(S_to) - np.asarray(S_from), k, k.theta / k.gamma)
    w_bar = 0.5 * w * (1.0 + e) + 0.5 * z * (1.0 - e)
    z_bar = 0.5 * w * (1.0 - e) + 0.5 * z * (1.0 + e)
    return w_bar, z_bar


def fluxes(state: PrimitiveState, k: GasConstants):
    """Mass and momentum fluxes ``(rho u, rho u^2 + p)``."""
    rho = np.asarray(state.rho, dtype=float)
    m = rho * state.u
    return m, m * state.u + pressure(state, k)


def godunov_fluxes(left: PrimitiveState, right: PrimitiveState, k: GasConstants):
    """Interface fluxes from the exact solution sampled at ``x/t = 0``."""
    fan = solve_batch(left, right, k)
    st = sample(fan, 0.0, k)
    f_rho, f_m = fluxes(st, k)
    return f_rho, f_m, fan
