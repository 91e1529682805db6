"""Godunov and Lax-Friedrichs time stepping with Lagrangian entropy transport.

One step: interface Riemann problems on the piecewise-constant field, flux
differencing of ``(rho, m)`` (equal to exact cell averaging of the slab
solution while waves from neighbouring interfaces do not meet), then the
entropy is re-evaluated from the heat solution at the new mass coordinate.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from . import diagnostics as diag
from .entropy_transport import (
    EntropyProfile,
    LagrangianTracker,
    entropy_cell_averages,
    update_lagrangian,
)
from .initial import InitialData
from .riemann import RiemannFan, godunov_fluxes, max_wave_speed
from .thermo import GasConstants, PrimitiveState, pressure, riemann_invariants, sound_speed

log = logging.getLogger(__name__)

BOUNDARIES = ("periodic", "extend")
SCHEMES = ("godunov", "lax_friedrichs")


class ConfigError(ValueError):
    pass


class StepRejected(RuntimeError):
    """The step must be retried with a smaller ``dt``."""


class StepFailure(RuntimeError):
    pass


@dataclass
class GridField:
    rho: np.ndarray
    m: np.ndarray
    S: np.ndarray
    aux_u: np.ndarray
    dx: float
    x_left: float = 0.0
    time: float = 0.0
    boundary: str = "periodic"

    @property
    def n_cells(self) -> int:
        return self.rho.size

    @property
    def edges(self):
        return self.x_left + self.dx * np.arange(self.n_cells + 1)

    @property
    def centers(self):
        return self.x_left + self.dx * (np.arange(self.n_cells) + 0.5)

    @property
    def u(self):
        return self.aux_u

    @property
    def primitive(self) -> PrimitiveState:
        return PrimitiveState(self.rho, self.aux_u, self.S)

    def invariants(self, k: GasConstants):
        return riemann_invariants(self.primitive, k)

    def copy(self) -> "GridField":
        return replace(self, rho=self.rho.copy(), m=self.m.copy(), S=self.S.copy(),
                       aux_u=self.aux_u.copy())


@dataclass(frozen=True)
class DiagnosticsToggles:
    decay: bool = False
    ledger: bool = True
    entropy: bool = True
    jump_sum: bool = False


@dataclass(frozen=True)
class RunConfig:
    constants: GasConstants
    profile: EntropyProfile
    initial: InitialData
    n_cells: int
    t_end: float
    x_left: float = 0.0
    x_right: float = 1.0
    cfl: float = 0.45
    scheme: str = "godunov"
    boundary: str = "periodic"
    vacuum_floor: float = 1e-12
    snapshot_every: int = 0
    max_retries: int = 8
    quadrature_order: int = 4
    diagnostics: DiagnosticsToggles = field(default_factory=DiagnosticsToggles)

    def __post_init__(self):
        if self.n_cells < 1:
            raise ConfigError("n_cells must be positive")
        if not self.x_right > self.x_left:
            raise ConfigError("x_right must exceed x_left")
        if not 0.0 < self.cfl <= 0.5:
            raise ConfigError("cfl must lie in (0, 0.5]")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.boundary not in BOUNDARIES:
            raise ConfigError(f"unknown boundary {self.boundary!r}")
        if self.t_end < 0:
            raise ConfigError("t_end must be nonnegative")

    @property
    def dx(self) -> float:
        return (self.x_right - self.x_left) / self.n_cells

    def origin_index(self) -> int:
        pos = -self.x_left / self.dx
        idx = round(pos)
        if abs(pos - idx) > 1e-9 * max(1.0, abs(pos)) or not 0 <= idx <= self.n_cells:
            raise ConfigError("x = 0 must be a cell interface inside the domain")
        return int(idx)


@dataclass
class StepResult:
    field: GridField
    tracker: LagrangianTracker
    dt: float
    flux_rho: np.ndarray
    flux_m: np.ndarray
    fans: RiemannFan | None = None


def _vacuum_runs(mask: np.ndarray, periodic: bool):
    """Maximal runs ``(start, stop)`` of True cells (``stop`` exclusive, may wrap)."""
    n = mask.size
    if not mask.any() or mask.all():
        return []
    runs = []
    i = 0
    while i < n:
        if mask[i]:
            j = i
            while j < n and mask[j]:
                j += 1
            runs.append([i, j])
            i = j
        else:
            i += 1
    if periodic and len(runs) > 1 and runs[0][0] == 0 and runs[-1][1] == n:
        first = runs.pop(0)
        runs[-1][1] = n + first[1]
    return [tuple(r) for r in runs]


def _fill_vacuum_velocity(aux_u, vacuum, left_edge_u, right_edge_u, periodic):
    """Mean-of-endpoints velocity on each vacuum run.

    ``left_edge_u(i)`` is the velocity at the left end of a run starting at
    cell ``i``; ``right_edge_u(j)`` at the right end of a run ending before ``j``.
    """
    n = aux_u.size
    for start, stop in _vacuum_runs(vacuum, periodic):
        u_mean = 0.5 * (left_edge_u(start) + right_edge_u(stop % n if periodic else stop))
        idx = np.arange(start, stop) % n
        aux_u[idx] = u_mean
    return aux_u


def _snap_vacuum(rho, m, floor):
    vac = rho < floor
    rho = np.where(vac, 0.0, rho)
    m = np.where(vac, 0.0, m)
    return rho, m, vac


def initialize(config: RunConfig):
    """Cell-averaged initial field and the matching Lagrangian tracker."""
    k = config.constants
    dx = config.dx
    origin = config.origin_index()
    edges = config.x_left + dx * np.arange(config.n_cells + 1)
    rho, m = config.initial.averages(edges)
    if np.any(rho < 0.0):
        raise ConfigError("initial density must be nonnegative")
    rho, m, vac = _snap_vacuum(rho, m, config.vacuum_floor)
    safe = np.where(vac, 1.0, rho)
    aux_u = np.where(vac, 0.0, m / safe)
    periodic = config.boundary == "periodic"

    def left_u(i):
        return aux_u[(i - 1) % config.n_cells] if (periodic or i > 0) else config.initial.velocity(edges[0])[()]

    def right_u(j):
        return aux_u[j % config.n_cells] if (periodic or j < config.n_cells) else config.initial.velocity(edges[-1])[()]

    aux_u = _fill_vacuum_velocity(aux_u, vac, left_u, right_u, periodic)
    tracker = LagrangianTracker.from_density(rho, dx, origin)
    S = entropy_cell_averages(config.profile, tracker, 0.0, config.quadrature_order)
    fld = GridField(rho, m, S, aux_u, dx, config.x_left, 0.0, config.boundary)

    if config.diagnostics.decay:
        if not periodic:
            raise ConfigError("decay diagnostics need periodic boundaries")
        check_mass_period(tracker)
    del k
    return fld, tracker


def check_mass_period(tracker: LagrangianTracker, tol: float = 1e-10) -> int:
    """Number of 2*pi periods of ``y`` spanned by the domain; raises if not integral."""
    span = tracker.interface_y[-1] - tracker.interface_y[0]
    turns = span / (2.0 * np.pi)
    n = round(turns)
    if n < 1 or abs(span - 2.0 * np.pi * n) > tol * max(1.0, abs(span)):
        raise ConfigError(
            f"periodic decay setup needs y0(L) to be a multiple of 2*pi; got {span!r}"
        )
    return int(n)


def cfl_dt(fld: GridField, k: GasConstants, cfl_number: float) -> float:
    gas = fld.rho > 0.0
    if not gas.any():
        return cfl_number * fld.dx
    prim = PrimitiveState(fld.rho[gas], fld.aux_u[gas], fld.S[gas])
    speed = np.max(np.abs(prim.u) + sound_speed(prim, k))
    if speed <= 0.0:
        return cfl_number * fld.dx
    return float(cfl_number * fld.dx / speed)


def _ghosted(fld: GridField):
    def pad(a):
        if fld.boundary == "periodic":
            return np.concatenate([a[-1:], a, a[:1]])
        return np.concatenate([a[:1], a, a[-1:]])

    return PrimitiveState(pad(fld.rho), pad(fld.aux_u), pad(fld.S))


def _finish_step(fld, tracker, profile, dt, rho, m, flux_rho, vacuum_floor, order,
                 left_edge_u, right_edge_u):
    rho, m, vac = _snap_vacuum(rho, m, vacuum_floor)
    safe = np.where(vac, 1.0, rho)
    aux_u = np.where(vac, 0.0, m / safe)
    periodic = fld.boundary == "periodic"
    if vac.any():
        aux_u = _fill_vacuum_velocity(aux_u, vac, left_edge_u, right_edge_u, periodic)
    t_new = fld.time + dt
    new = GridField(rho, m, np.empty_like(rho), aux_u, fld.dx, fld.x_left, t_new, fld.boundary)
    new_tracker = update_lagrangian(tracker, new, flux_rho[tracker.origin_index] * dt, dt)
    new.S = entropy_cell_averages(profile, new_tracker, t_new, order)
    return new, new_tracker


def godunov_step(fld: GridField, tracker: LagrangianTracker, profile: EntropyProfile,
                 dt: float, k: GasConstants, *, vacuum_floor: float = 1e-12,
                 quadrature_order: int = 4) -> StepResult:
    """One Godunov step of length ``dt``.

    Raises :class:`StepRejected` if some interface fan has a wave faster than
    ``dx / (2 dt)``.
    """
    g = _ghosted(fld)
    left = PrimitiveState(*(a[:-1] for a in g))
    right = PrimitiveState(*(a[1:] for a in g))
    f_rho, f_m, fans = godunov_fluxes(left, right, k)
    if fld.boundary == "periodic":
        # the wrap-around interface must carry bit-identical fluxes
        f_rho[-1] = f_rho[0]
        f_m[-1] = f_m[0]
    speed = float(np.max(max_wave_speed(fans, k)))
    if speed * dt > 0.5 * fld.dx * (1.0 + 1e-12):
        raise StepRejected(f"wave speed {speed:.6g} violates the CFL bound for dt={dt:.6g}")
    lam = dt / fld.dx
    rho = fld.rho - lam * (f_rho[1:] - f_rho[:-1])
    m = fld.m - lam * (f_m[1:] - f_m[:-1])

    vu_left = np.where(fans.vacuum, fans.vac_u_left, fans.u_star)
    vu_right = np.where(fans.vacuum, fans.vac_u_right, fans.u_star)
    new, new_tracker = _finish_step(
        fld, tracker, profile, dt, rho, m, f_rho, vacuum_floor, quadrature_order,
        left_edge_u=lambda i: vu_left[i],
        right_edge_u=lambda j: vu_right[j],
    )
    return StepResult(new, new_tracker, dt, f_rho, f_m, fans)


def lax_friedrichs_step(fld: GridField, tracker: LagrangianTracker, profile: EntropyProfile,
                        dt: float, k: GasConstants, *, vacuum_floor: float = 1e-12,
                        quadrature_order: int = 4) -> StepResult:
    """One Lax-Friedrichs step; rejects steps that would make density negative."""
    g = _ghosted(fld)
    gas = g.rho > 0.0
    c = np.where(gas, sound_speed(g, k), 0.0)
    speed = float(np.max(np.where(gas, np.abs(g.u) + c, 0.0)))
    if speed * dt > 0.5 * fld.dx * (1.0 + 1e-12):
        raise StepRejected(f"cell speed {speed:.6g} violates the CFL bound for dt={dt:.6g}")
    rho_g = g.rho
    m_g = rho_g * g.u
    f_rho_c = m_g
    f_m_c = m_g * g.u + pressure(g, k)
    coef = 0.5 * fld.dx / dt
    f_rho = 0.5 * (f_rho_c[:-1] + f_rho_c[1:]) - coef * (rho_g[1:] - rho_g[:-1])
    f_m = 0.5 * (f_m_c[:-1] + f_m_c[1:]) - coef * (m_g[1:] - m_g[:-1])
    if fld.boundary == "periodic":
        f_rho[-1] = f_rho[0]
        f_m[-1] = f_m[0]
    lam = dt / fld.dx
    rho = fld.rho - lam * (f_rho[1:] - f_rho[:-1])
    m = fld.m - lam * (f_m[1:] - f_m[:-1])
    if np.any(rho < -vacuum_floor):
        raise StepRejected("Lax-Friedrichs update produced negative density")
    n = fld.n_cells
    w, z = riemann_invariants(g, k)
    new, new_tracker = _finish_step(
        fld, tracker, profile, dt, rho, m, f_rho, vacuum_floor, quadrature_order,
        left_edge_u=lambda i: w[i],
        right_edge_u=lambda j: z[min(j, n) + 1],
    )
    return StepResult(new, new_tracker, dt, f_rho, f_m, None)


STEPPERS = {"godunov": godunov_step, "lax_friedrichs": lax_friedrichs_step}


@dataclass
class RunResult:
    field: GridField
    tracker: LagrangianTracker
    initial_field: GridField
    records: list
    steps: int
    ledger: "diag.BoundLedger | None" = None
    means: tuple | None = None


def advance(fld, tracker, profile, dt, k, stepper, *, max_retries=8, **kw) -> StepResult:
    """Take one step, halving ``dt`` up to ``max_retries`` times on rejection."""
    for attempt in range(max_retries + 1):
        try:
            return stepper(fld, tracker, profile, dt, k, **kw)
        except StepRejected as exc:
            log.debug("step at t=%g rejected (%s); halving dt", fld.time, exc)
            if attempt == max_retries:
                raise StepFailure(f"step at t={fld.time} failed after {max_retries} halvings") from exc
            dt *= 0.5
    raise AssertionError("unreachable")


def run(config: RunConfig, sinks: Iterable = ()) -> RunResult:
    """Integrate from ``t = 0`` to ``config.t_end``.

    ``sinks`` receive ``snapshot(step, field)`` and ``record(dict)`` calls;
    either method may be absent.
    """
    k = config.constants
    sinks = list(sinks)
    fld, tracker = initialize(config)
    initial = fld.copy()
    toggles = config.diagnostics
    stepper = STEPPERS[config.scheme]
    kw = dict(vacuum_floor=config.vacuum_floor, quadrature_order=config.quadrature_order)

    means = diag.field_means(initial, config.profile)
    ledger = None
    if toggles.ledger:
        ledger = diag.BoundLedger.start(initial, config.profile, k, config.cfl)
    recorder = diag.StepRecorder(k, means if toggles.decay else None)

    def emit_snapshot(step, f):
        for s in sinks:
            if hasattr(s, "snapshot"):
                s.snapshot(step, f)

    def emit_record(rec):
        for s in sinks:
            if hasattr(s, "record"):
                s.record(rec)

    records = [recorder.initial(fld, ledger)]
    emit_record(records[0])
    emit_snapshot(0, fld)

    step = 0
    t_end = config.t_end
    while fld.time < t_end and not math.isclose(fld.time, t_end, rel_tol=1e-14, abs_tol=1e-300):
        dt_cfl = cfl_dt(fld, k, config.cfl)
        truncated = t_end - fld.time < dt_cfl
        dt = min(dt_cfl, t_end - fld.time)
        res = advance(fld, tracker, config.profile, dt, k, stepper,
                      max_retries=config.max_retries, **kw)
        jump = None
        if toggles.jump_sum and res.fans is not None:
            pre = diag.pre_average_samples(fld, res, k)
            jump = diag.jump_quadratic_sum(pre, res.field, k)
        if ledger is not None:
            diag.growth_ledger_update(ledger, res.field, step, res.dt, k, previous_time=fld.time,
                                     truncated=truncated)
        step += 1
        fld, tracker = res.field, res.tracker
        rec = recorder.step(step, fld, res.dt, ledger, jump)
        records.append(rec)
        emit_record(rec)
        if config.snapshot_every and step % config.snapshot_every == 0:
            emit_snapshot(step, fld)
    if not (config.snapshot_every and step % config.snapshot_every == 0) and step > 0:
        emit_snapshot(step, fld)
    return RunResult(fld, tracker, initial, records, step, ledger, means)
