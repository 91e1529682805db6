"""Self-convergence and long-time decay harnesses."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from . import diagnostics as diag
from .scheme import ConfigError, RunConfig, check_mass_period, initialize, run


def block_average(values: np.ndarray, factor: int) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.size % factor:
        raise ValueError("fine grid is not a whole multiple of the coarse grid")
    return values.reshape(-1, factor).mean(axis=1)


def l1_difference(coarse, fine) -> float:
    """``sum |U_c - P U_f| dx_c`` over ``(rho, m)``, ``P`` the block average."""
    factor = fine.n_cells // coarse.n_cells
    err = 0.0
    for name in ("rho", "m"):
        err += float(np.sum(np.abs(getattr(coarse, name) - block_average(getattr(fine, name), factor))))
    return err * coarse.dx


def observed_orders(errors) -> list[float]:
    out = []
    for a, b in zip(errors[:-1], errors[1:]):
        if a == 0.0 and b == 0.0:
            out.append(math.nan)
        elif b == 0.0:
            out.append(math.inf)
        else:
            out.append(math.log2(a / b))
    return out


@dataclass
class ConvergenceResult:
    n_cells: list
    errors: list  # between levels k and k+1
    orders: list
    fields: list


def convergence_study(config: RunConfig, levels: int) -> ConvergenceResult:
    """Run at ``n_cells * 2**i`` for ``i < levels`` and compare consecutive levels."""
    if levels < 3:
        raise ConfigError("convergence study needs at least 3 levels")
    base = dataclasses.replace(
        config, diagnostics=dataclasses.replace(config.diagnostics, decay=False, jump_sum=False),
        snapshot_every=0,
    )
    ns = [config.n_cells * 2**i for i in range(levels)]
    fields = [run(dataclasses.replace(base, n_cells=n)).field for n in ns]
    errors = [l1_difference(c, f) for c, f in zip(fields[:-1], fields[1:])]
    return ConvergenceResult(ns, errors, observed_orders(errors), fields)


@dataclass
class DecayResult:
    times: np.ndarray
    metric: np.ndarray
    ratio: float
    smoothed_decreasing: bool
    result: object


def check_decay_setup(config: RunConfig):
    if config.boundary != "periodic":
        raise ConfigError("decay runs need periodic boundaries")
    _, tracker = initialize(dataclasses.replace(
        config, diagnostics=dataclasses.replace(config.diagnostics, decay=False)))
    return check_mass_period(tracker)


def decay_study(config: RunConfig, sinks=()) -> DecayResult:
    """Long periodic run logging the L1 distance to the means."""
    check_decay_setup(config)
    cfg = dataclasses.replace(config, diagnostics=dataclasses.replace(config.diagnostics, decay=True))
    res = run(cfg, sinks)
    t = np.array([r["t"] for r in res.records])
    d = np.array([r["decay_L1"] for r in res.records])
    ratio = float(d[-1] / d[0]) if d[0] > 0 else 0.0
    sm = diag.smoothed(d, 10)
    return DecayResult(t, d, ratio, bool(sm[-1] < sm[0]) if sm.size else True, res)
