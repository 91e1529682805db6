"""Entropy pairs, invariant-region ledger, jump sums and the decay metric.

Everything here only reads fields produced by :mod:`diffgas.scheme`; fields
are duck-typed (``rho``, ``m``, ``S``, ``aux_u``, ``dx``, ``time``,
``boundary``) to keep this module free of a circular import.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, linalg, special

from .entropy_transport import EntropyProfile
from .riemann import max_wave_speed, sample, solve_batch
from .thermo import GasConstants, PrimitiveState, entropy_factor, pressure, riemann_invariants

KERNEL_FORMS = ("printed", "kinetic")


# -- the mechanical energy pair ------------------------------------------------

def entropy_star(state: PrimitiveState, k: GasConstants):
    """Mechanical energy ``eta*`` and its flux ``q* = u (eta* + p)``; both vanish at vacuum."""
    rho = np.asarray(state.rho, dtype=float)
    u = np.where(rho > 0.0, state.u, 0.0)
    p = pressure(state, k)
    eta = 0.5 * rho * u * u + p / (k.gamma - 1.0)
    q = u * (eta + p)
    if np.ndim(eta) == 0:
        return float(eta), float(q)
    return eta, q


def entropy_star_hessian(rho, m, S, k: GasConstants):
    """Hessian of ``eta*`` in ``(rho, m)`` at fixed ``S``, shape ``(..., 2, 2)``.

    ``[[m^2/rho^3 + c^2/rho, -m/rho^2], [-m/rho^2, 1/rho]]``; requires ``rho > 0``.
    """
    rho = np.asarray(rho, dtype=float)
    m = np.asarray(m, dtype=float)
    c2 = k.kappa * k.gamma * entropy_factor(S, k, k.gamma - 1.0) * rho ** (k.gamma - 1.0)
    h = np.empty(np.broadcast(rho, m).shape + (2, 2))
    h[..., 0, 0] = m * m / rho**3 + c2 / rho
    h[..., 0, 1] = h[..., 1, 0] = -m / rho**2
    h[..., 1, 1] = 1.0 / rho
    return h


def entropy_total(fld, k: GasConstants) -> float:
    eta, _ = entropy_star(PrimitiveState(fld.rho, fld.aux_u, fld.S), k)
    return float(np.sum(eta) * fld.dx)


# -- weak entropies ------------------------------------------------------------

def _check_gamma(k: GasConstants):
    if not k.gamma < 3.0:
        raise ValueError("weak entropies need gamma < 3")


def kernel_half_width(rho, S, k: GasConstants, form: str = "printed"):
    """Half-width of the support of ``chi`` in ``xi - u``."""
    if form not in KERNEL_FORMS:
        raise ValueError(f"unknown kernel form {form!r}")
    a = entropy_factor(S, k, k.theta) * np.asarray(rho, dtype=float) ** k.theta
    return np.sqrt(k.kappa) * a if form == "printed" else a


def chi(rho, v, S, k: GasConstants, form: str = "printed"):
    """Entropy kernel at velocity offset ``v = xi - u``.

    ``form="printed"`` is ``(p/rho - v^2)_+^lambda``; ``form="kinetic"`` is
    ``(exp(2 theta S/K) rho^(2 theta) - v^2)_+^lambda``.
    """
    _check_gamma(k)
    a = kernel_half_width(rho, S, k, form)
    base = np.maximum(a * a - np.asarray(v, dtype=float) ** 2, 0.0)
    return np.where(base > 0.0, base ** k.lambda_exp, 0.0)


def beta_constant(k: GasConstants) -> float:
    """``int_{-1}^{1} (1 - z^2)^lambda dz``."""
    _check_gamma(k)
    return float(special.beta(0.5, k.lambda_exp + 1.0))


def weak_entropy_pair(g: Callable[[float], float], state: PrimitiveState, k: GasConstants,
                      form: str = "printed", rtol: float = 1e-11):
    """``eta = int g(xi) chi dxi`` and ``q = int g(xi) (theta xi + (1-theta) u) chi dxi``.

    Integrated by adaptive quadrature after ``xi = u + a sin(phi)``, which
    removes the endpoint singularity of ``chi``.  Scalar state only.
    """
    _check_gamma(k)
    rho = float(state.rho)
    if rho < 0.0:
        raise ValueError("density must be nonnegative")
    if rho == 0.0:
        return 0.0, 0.0
    u = float(state.u)
    a = float(kernel_half_width(rho, state.S, k, form))
    power = 2.0 * k.lambda_exp + 1.0
    scale = a**power
    th = k.theta

    def eta_integrand(phi):
        return g(u + a * math.sin(phi)) * math.cos(phi) ** power

    def q_integrand(phi):
        xi = u + a * math.sin(phi)
        return g(xi) * (th * xi + (1.0 - th) * u) * math.cos(phi) ** power

    lim = 0.5 * math.pi
    eta, _ = integrate.quad(eta_integrand, -lim, lim, epsabs=0.0, epsrel=rtol, limit=200)
    q, _ = integrate.quad(q_integrand, -lim, lim, epsabs=0.0, epsrel=rtol, limit=200)
    return scale * eta, scale * q


def _jacobi_rule(k: GasConstants, n: int):
    return special.roots_jacobi(n, k.lambda_exp, k.lambda_exp)


def weak_entropy_alternative(g: Callable, state: PrimitiveState, k: GasConstants, n_nodes: int = 64):
    """``rho int_{-1}^{1} g(u + z e^{theta S/K} rho^theta) (1 - z^2)^lambda dz``.

    Gauss-Jacobi quadrature; ``g`` must accept arrays.  Equals the kinetic
    form of :func:`weak_entropy_pair` divided by ``exp(S/K)``.
    """
    _check_gamma(k)
    rho = np.asarray(state.rho, dtype=float)
    z, w = _jacobi_rule(k, n_nodes)
    a = kernel_half_width(rho, state.S, k, "kinetic")
    xi = np.asarray(state.u, dtype=float)[..., None] + np.asarray(a)[..., None] * z
    val = rho * (np.asarray(g(xi)) @ w)
    return val[()] if np.ndim(val) == 0 else val


def kernel_form_ratio(state: PrimitiveState, k: GasConstants) -> float:
    """Ratio printed / alternative for ``g = 1``: ``kappa^(1/(2 theta)) exp(S/K)``."""
    return float(k.kappa ** (0.5 / k.theta) * entropy_factor(state.S, k))


def _fd_hessian(f, rho, m, step=1e-3):
    hr = step * rho
    hm = step * max(1.0, abs(m))
    f0 = f(rho, m)
    frr = (f(rho + hr, m) - 2.0 * f0 + f(rho - hr, m)) / hr**2
    fmm = (f(rho, m + hm) - 2.0 * f0 + f(rho, m - hm)) / hm**2
    frm = (f(rho + hr, m + hm) - f(rho + hr, m - hm)
           - f(rho - hr, m + hm) + f(rho - hr, m - hm)) / (4.0 * hr * hm)
    return np.array([[frr, frm], [frm, fmm]])


def weak_entropy_hessian(g: Callable, rho: float, m: float, S: float, k: GasConstants):
    """Finite-difference Hessian in ``(rho, m)`` of the kinetic weak entropy."""
    scale = float(entropy_factor(S, k))

    def eta(r, mm):
        return scale * weak_entropy_alternative(g, PrimitiveState(r, mm / r, S), k)

    return _fd_hessian(eta, rho, m)


def convexifying_constant(g: Callable, states: Sequence[PrimitiveState], k: GasConstants,
                          margin: float = 1.5) -> float:
    """Smallest ``C`` (times ``margin``) making ``eta + C eta*`` convex on ``states``.

    Uses the generalized eigenvalues of ``(-D^2 eta, D^2 eta*)``.
    """
    worst = 0.0
    for st in states:
        m = st.rho * st.u
        h = weak_entropy_hessian(g, st.rho, m, st.S, k)
        hs = entropy_star_hessian(st.rho, m, st.S, k)
        lam = linalg.eigh(-h, hs, eigvals_only=True)
        worst = max(worst, float(lam[-1]))
    return margin * worst


# -- entropy inequality --------------------------------------------------------

@dataclass
class EntropyResidual:
    times: np.ndarray  # t_j at the start of each step
    production: np.ndarray  # D_j
    constant: float  # fitted C
    ok: bool


def fit_residual_envelope(times, production, n_fit: int = 10, slack: float = 1e-10) -> EntropyResidual:
    """Fit ``C = max_{j < n_fit} D_j e^{t_j}`` and check ``D_j <= C e^{-t_j}`` throughout."""
    times = np.asarray(times, dtype=float)
    d = np.asarray(production, dtype=float)
    head = d[:n_fit] * np.exp(times[:n_fit])
    c = max(float(np.max(head)) if head.size else 0.0, 0.0)
    ok = bool(np.all(d <= c * np.exp(-times) + slack))
    return EntropyResidual(times, d, c, ok)


def entropy_residual(fields: Sequence, k: GasConstants, n_fit: int = 10,
                     slack: float = 1e-10) -> EntropyResidual:
    """``D_j = (E_{j+1} - E_j)/h`` over consecutive periodic snapshots."""
    if any(f.boundary != "periodic" for f in fields):
        raise ValueError("entropy residual needs periodic boundaries")
    if len(fields) < 2:
        raise ValueError("need at least two snapshots")
    totals = np.array([entropy_total(f, k) for f in fields])
    t = np.array([f.time for f in fields])
    d = np.diff(totals) / np.diff(t)
    return fit_residual_envelope(t[:-1], d, n_fit, slack)


@dataclass
class EntropyRecord:
    totals: list = field(default_factory=list)
    production: list = field(default_factory=list)
    jump_sums: list = field(default_factory=list)

    @property
    def running_jump_sum(self) -> float:
        return float(np.sum(self.jump_sums))


# -- invariant region and growth ledger -----------------------------------------

def bound_radius(fld, k: GasConstants) -> tuple[float, float, float]:
    """``(max w, min z, r)`` over all cells, vacuum cells included."""
    w, z = riemann_invariants(PrimitiveState(fld.rho, fld.aux_u, fld.S), k)
    mw, mz = float(np.max(w)), float(np.min(z))
    return mw, mz, max(mw, -mz)


def _initial_speed(fld, k: GasConstants) -> float:
    """Largest signal speed at the start: cells and the first interface fans."""
    st = PrimitiveState(fld.rho, fld.aux_u, fld.S)
    if fld.boundary == "periodic":
        pad = [np.concatenate([v[-1:], v, v[:1]]) for v in st]
    else:
        pad = [np.concatenate([v[:1], v, v[-1:]]) for v in st]
    fans = solve_batch(PrimitiveState(*(v[:-1] for v in pad)),
                       PrimitiveState(*(v[1:] for v in pad)), k)
    return float(np.max(max_wave_speed(fans, k)))


@dataclass
class BoundLedger:
    """Measured ``r_j`` against the multiplicative envelope.

    Per step the re-evaluated entropy of a cell differs from the entropy of
    any state averaged into it by at most ``c0 e^{-t} (h + 4 rho_sup dx)``,
    which multiplies ``r`` by at most ``exp(theta dS / K_gas)``.  This gives
    ``C_measured = c0 (1 + 4 rho_sup D) / (2 K_gas)`` with ``D`` a bound on
    ``dx / h``.  Both are measured at the start: ``rho_sup`` is twice the
    initial maximum density and ``D`` is twice the CFL ratio of the initial
    interface fans (one retry halving).  Steps that break either are listed in
    ``assumption_breaches``.
    """

    r0: float
    C_measured: float
    rho_sup: float
    dx_over_h: float
    gamma: float
    R_cap: float = math.inf
    measured: list = field(default_factory=list)
    envelope: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    assumption_breaches: list = field(default_factory=list)

    # the exp(theta dS/K) <= (1 + x)^2 step is valid for x up to this value
    X_MAX = 2.5

    @classmethod
    def start(cls, fld, profile: EntropyProfile, k: GasConstants, cfl_number: float,
              R_cap: float = math.inf) -> "BoundLedger":
        _, _, r0 = bound_radius(fld, k)
        rho_sup = 2.0 * float(np.max(fld.rho)) if fld.rho.size else 0.0
        D = 2.0 * max(_initial_speed(fld, k), 1e-300) / cfl_number
        c = profile.c0_bound * (1.0 + 4.0 * rho_sup * D) / (2.0 * k.gas_const)
        led = cls(r0, c, rho_sup, D, k.gamma, R_cap)
        led.measured.append(r0)
        led.envelope.append(r0)
        return led

    @property
    def total_bound(self) -> float:
        """``exp(2 C (gamma - 1))``, the bound on ``r_j / r0``."""
        try:
            return math.exp(2.0 * self.C_measured * (self.gamma - 1.0))
        except OverflowError:
            return math.inf

    @property
    def growth_factor(self) -> float:
        return self.measured[-1] / self.r0 if self.r0 > 0 else 1.0

    @property
    def max_growth_factor(self) -> float:
        return max(self.measured) / self.r0 if self.r0 > 0 else 1.0

    @property
    def within_envelope(self) -> bool:
        return not self.violations

    @property
    def assumptions_hold(self) -> bool:
        return not self.assumption_breaches

    @property
    def ok(self) -> bool:
        return self.within_envelope and self.assumptions_hold


def growth_ledger_update(ledger: BoundLedger, fld, step_index: int, h: float, k: GasConstants,
                         previous_time: float | None = None, truncated: bool = False,
                         tol: float = 1e-10) -> BoundLedger:
    """Append step ``step_index`` (starting at ``t_j``) of length ``h``.

    The envelope follows ``r_{j+1} = r_j (1 + C (gamma-1) h e^{-t_j})^2``.
    ``truncated`` marks a step shortened to land on ``t_end``, which is
    exempt from the ``dx / h`` assumption.
    """
    t_j = fld.time - h if previous_time is None else previous_time
    _, _, r = bound_radius(fld, k)
    x = ledger.C_measured * (k.gamma - 1.0) * h * math.exp(-t_j)
    env = ledger.envelope[-1] * (1.0 + x) ** 2
    ledger.measured.append(r)
    ledger.envelope.append(env)
    if r > env + tol * max(1.0, abs(env)) or r > ledger.R_cap:
        ledger.violations.append(step_index)
    if ledger.C_measured > 0.0:
        breach = []
        if np.max(fld.rho) > ledger.rho_sup:
            breach.append("rho_sup")
        if not truncated and fld.dx / h > ledger.dx_over_h:
            breach.append("dx_over_h")
        if x > ledger.X_MAX:
            breach.append("step_too_large")
        if breach:
            ledger.assumption_breaches.append((step_index, tuple(breach)))
    return ledger


# -- jump quadratic sum --------------------------------------------------------

@dataclass
class SlabSamples:
    """Exact slab solution at ``t_j + h - 0`` at quadrature points, per cell.

    Arrays have shape ``(n_cells, n_points)``; ``weights`` sum to ``dx`` per cell.
    """

    x: np.ndarray
    weights: np.ndarray
    rho: np.ndarray
    m: np.ndarray
    S: np.ndarray


def _half_cell(fans, cols, lo, hi, h, order, k):
    sp = np.asarray(fans.wave_speeds)[cols]
    n = sp.shape[0]
    brk = np.sort(np.concatenate([np.full((n, 1), lo), np.clip(sp, lo, hi),
                                  np.full((n, 1), hi)], axis=1), axis=1)
    a, b = brk[:, :-1], brk[:, 1:]
    gx, gw = np.polynomial.legendre.leggauss(order)
    frac = 0.5 * (gx + 1.0)
    xi = (a[:, :, None] + (b - a)[:, :, None] * frac).reshape(n, -1)
    w = ((b - a)[:, :, None] * 0.5 * gw * h).reshape(n, -1)
    n_all = np.size(fans.p_star)
    full = np.zeros((xi.shape[1], n_all))
    full[:, cols] = xi.T
    st = sample(fans, full, k)
    pick = lambda v: np.asarray(v)[:, cols].T  # noqa: E731
    rho, u, S = pick(st.rho), pick(st.u), pick(st.S)
    return xi, w, rho, rho * u, S


def pre_average_samples(fld, step, k: GasConstants, order: int = 4) -> SlabSamples:
    """Sample the slab solution of a Godunov step just before averaging.

    Cell ``i`` is covered by the fan of interface ``i`` on its left half and
    by the fan of interface ``i + 1`` on its right half (CFL <= 1/2).
    ``step`` is the :class:`~diffgas.scheme.StepResult` of that step.
    """
    fans = step.fans
    if fans is None:
        raise ValueError("slab samples need the interface fans of a Godunov step")
    h = step.dt
    n = fld.rho.size
    half = 0.5 * fld.dx / h
    left = _half_cell(fans, np.arange(n), 0.0, half, h, order, k)
    right = _half_cell(fans, np.arange(1, n + 1), -half, 0.0, h, order, k)
    edges = fld.x_left + fld.dx * np.arange(n + 1)
    x = np.concatenate([edges[:-1, None] + h * left[0], edges[1:, None] + h * right[0]], axis=1)
    cat = lambda i: np.concatenate([left[i], right[i]], axis=1)  # noqa: E731
    return SlabSamples(x, cat(1), cat(2), cat(3), cat(4))


def jump_quadratic_sum(pre: SlabSamples, post, k: GasConstants) -> float:
    """``sum_i int_{I_i} dV^T D^2 eta*(V_post) dV dx`` with ``dV = V_pre - V_post``.

    Cells with vacuum after averaging contribute nothing.
    """
    n = post.rho.size
    if pre.rho.shape[0] != n:
        raise ValueError("pre-average samples do not match the field")
    gas = post.rho > 0.0
    if not gas.any():
        return 0.0
    hess = entropy_star_hessian(post.rho[gas], post.m[gas], post.S[gas], k)
    d_rho = pre.rho[gas] - post.rho[gas, None]
    d_m = pre.m[gas] - post.m[gas, None]
    quad = (hess[:, None, 0, 0] * d_rho**2 + 2.0 * hess[:, None, 0, 1] * d_rho * d_m
            + hess[:, None, 1, 1] * d_m**2)
    return float(np.sum(quad * pre.weights[gas]))


# -- decay ---------------------------------------------------------------------

def field_means(fld, profile: EntropyProfile):
    """``(rho_bar, m_bar, S_bar)``: conserved means and the profile mean."""
    return float(np.mean(fld.rho)), float(np.mean(fld.m)), float(profile.mean)


def decay_metric(fld, means) -> float:
    rho_bar, m_bar, s_bar = means
    dev = np.abs(fld.rho - rho_bar) + np.abs(fld.m - m_bar) + np.abs(fld.S - s_bar)
    return float(np.sum(dev) * fld.dx)


def smoothed(series, window: int = 10):
    """Trailing moving average."""
    a = np.asarray(series, dtype=float)
    if a.size < window:
        return a.copy()
    c = np.cumsum(np.concatenate([[0.0], a]))
    return (c[window:] - c[:-window]) / window


# -- per-step records ----------------------------------------------------------

class StepRecorder:
    """Builds the per-step diagnostic dictionaries written as JSON lines."""

    def __init__(self, k: GasConstants, means=None):
        self.k = k
        self.means = means
        self.entropy = EntropyRecord()

    def _base(self, step, fld, dt, ledger):
        mw, mz, _ = bound_radius(fld, self.k)
        total = entropy_total(fld, self.k)
        rec = {
            "step": step,
            "t": fld.time,
            "dt": dt,
            "max_w": mw,
            "min_z": mz,
            "r_envelope": ledger.envelope[-1] if ledger is not None else None,
            "entropy_total": total,
        }
        return rec, total

    def initial(self, fld, ledger):
        rec, total = self._base(0, fld, 0.0, ledger)
        self.entropy.totals.append(total)
        rec["entropy_production"] = None
        rec["jump_sum"] = 0.0
        rec["decay_L1"] = decay_metric(fld, self.means) if self.means is not None else None
        return rec

    def step(self, step, fld, dt, ledger, jump=None):
        rec, total = self._base(step, fld, dt, ledger)
        prod = (total - self.entropy.totals[-1]) / dt
        self.entropy.totals.append(total)
        self.entropy.production.append(prod)
        if jump is not None:
            self.entropy.jump_sums.append(jump)
        rec["entropy_production"] = prod
        rec["jump_sum"] = self.entropy.running_jump_sum
        rec["decay_L1"] = decay_metric(fld, self.means) if self.means is not None else None
        return rec
