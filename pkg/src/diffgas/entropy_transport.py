"""Diffusive entropy carried in the Lagrangian mass coordinate.

In the mass coordinate ``y`` the entropy obeys the heat equation, so
``S(x, t) = sigma~(y(x, t), t)`` with ``sigma~`` the heat evolution of a
2*pi-periodic profile.  Profiles are truncated Fourier series, which makes
the heat evolution exact mode by mode.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

DEFAULT_MODES = 64


@dataclass(frozen=True)
class EntropyProfile:
    """Real 2*pi-periodic profile ``sigma(y) = sum_k c_k exp(i k y)``.

    Only ``c_0`` and the ``k >= 1`` coefficients are stored; ``c_{-k}`` is the
    conjugate of ``c_k``.
    """

    mean: float
    wavenumbers: np.ndarray  # k >= 1 with c_k != 0
    coeffs: np.ndarray  # complex c_k for those k

    @classmethod
    def from_coefficients(cls, coeffs: dict[int, complex]) -> "EntropyProfile":
        """Build from ``{k: c_k}``; negative ``k`` must be conjugate-consistent."""
        pos: dict[int, complex] = {}
        mean = 0.0
        for kk, c in coeffs.items():
            kk = int(kk)
            c = complex(c)
            if kk == 0:
                if abs(c.imag) > 1e-14:
                    raise ValueError("mean coefficient must be real")
                mean = c.real
            elif kk > 0:
                pos[kk] = pos.get(kk, 0j) + c
        for kk, c in coeffs.items():
            kk = int(kk)
            if kk < 0:
                expect = pos.get(-kk, 0j).conjugate()
                if abs(complex(c) - expect) > 1e-12 * max(1.0, abs(expect)):
                    raise ValueError(f"c_{kk} is not the conjugate of c_{-kk}")
        ks = np.array(sorted(k for k, c in pos.items() if c != 0), dtype=float)
        cs = np.array([pos[int(k)] for k in ks], dtype=complex)
        return cls(float(mean), ks, cs)

    @classmethod
    def constant(cls, value: float) -> "EntropyProfile":
        return cls(float(value), np.zeros(0), np.zeros(0, dtype=complex))

    @classmethod
    def cosine(cls, amplitude: float = 1.0, mode: int = 1, mean: float = 0.0,
               phase: float = 0.0) -> "EntropyProfile":
        """``mean + amplitude * cos(mode * y + phase)``."""
        c = 0.5 * amplitude * np.exp(1j * phase)
        return cls.from_coefficients({0: mean, int(mode): c})

    @classmethod
    def from_function(cls, func: Callable[[np.ndarray], np.ndarray],
                      n_modes: int = DEFAULT_MODES) -> "EntropyProfile":
        """Project ``func`` onto modes ``|k| <= n_modes`` using ``4K+1`` samples."""
        n = 4 * n_modes + 1
        y = 2.0 * np.pi * np.arange(n) / n
        vals = np.asarray(func(y), dtype=float)
        ks = np.arange(0, n_modes + 1)
        c = np.exp(-1j * np.outer(ks, y)) @ vals / n
        coeffs = {0: c[0].real}
        # drop roundoff-level modes so exact trigonometric inputs stay exact
        tol = 1e-14 * max(1.0, np.max(np.abs(vals)))
        coeffs.update({int(kk): c[kk] for kk in ks[1:] if abs(c[kk]) > tol})
        return cls.from_coefficients(coeffs)

    @property
    def fourier_coeffs(self) -> dict[int, complex]:
        out = {0: complex(self.mean)}
        for kk, c in zip(self.wavenumbers.astype(int), self.coeffs):
            out[int(kk)] = complex(c)
            out[-int(kk)] = complex(c).conjugate()
        return out

    @property
    def c0_bound(self) -> float:
        """``sum_{k != 0} (1 + |k| + k^2) |c_k|``; bounds the decay constants."""
        k = self.wavenumbers
        return float(2.0 * np.sum((1.0 + k + k * k) * np.abs(self.coeffs)))

    @property
    def is_constant(self) -> bool:
        return self.wavenumbers.size == 0

    def evolved(self, t: float) -> "EntropyProfile":
        """The profile ``sigma~(., t)``."""
        if t < 0:
            raise ValueError("time must be nonnegative")
        k = self.wavenumbers
        return EntropyProfile(self.mean, k.copy(), self.coeffs * np.exp(-k * k * t))

    def __call__(self, y):
        return heat_solution(self, y, 0.0)


def _modes(profile: EntropyProfile, y, t):
    y = np.asarray(y, dtype=float)
    k = profile.wavenumbers
    decay = profile.coeffs * np.exp(-k * k * t)
    phase = np.exp(1j * np.multiply.outer(y, k))
    return y, k, decay, phase


def heat_solution(profile: EntropyProfile, y, t):
    """``sigma~(y, t)``, the periodic heat evolution of the profile."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    if profile.is_constant:
        return np.full(np.shape(y), profile.mean)[()]
    y, k, decay, phase = _modes(profile, y, t)
    val = profile.mean + 2.0 * np.real(phase @ decay)
    return val[()] if np.ndim(val) == 0 else val


def heat_solution_derivatives(profile: EntropyProfile, y, t):
    """``(sigma~_y, sigma~_yy, sigma~_t)``; the last two coincide."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    if profile.is_constant:
        z = np.zeros(np.shape(y))[()]
        return z, z, z
    y, k, decay, phase = _modes(profile, y, t)
    d1 = 2.0 * np.real(phase @ (1j * k * decay))
    d2 = 2.0 * np.real(phase @ (-k * k * decay))
    if np.ndim(d1) == 0:
        d1, d2 = d1[()], d2[()]
    return d1, d2, d2


def decay_bound_check(profile: EntropyProfile, t: float, n_samples: int = 512):
    """Check ``|sigma~ - mean|, |sigma~_y|, |sigma~_yy| <= c0_bound * exp(-t)``.

    Returns ``(ok, sups)`` where ``sups`` maps names to the sampled maxima.
    """
    y = 2.0 * np.pi * np.arange(max(n_samples, 256)) / max(n_samples, 256)
    val = heat_solution(profile, y, t)
    dy, dyy, _ = heat_solution_derivatives(profile, y, t)
    sups = {
        "value": float(np.max(np.abs(val - profile.mean))),
        "dy": float(np.max(np.abs(dy))),
        "dyy": float(np.max(np.abs(dyy))),
    }
    bound = profile.c0_bound * np.exp(-t)
    ok = all(v <= bound * (1.0 + 1e-12) + 1e-300 for v in sups.values())
    return ok, sups


@dataclass(frozen=True)
class LagrangianTracker:
    """Mass coordinate at the cell interfaces.

    ``interface_y[j]`` is ``y`` at the ``j``-th interface; interface
    ``origin_index`` sits at ``x = 0``.  ``origin_offset`` accumulates minus
    the time-integrated mass flux through ``x = 0``.
    """

    interface_y: np.ndarray
    origin_offset: float
    origin_index: int

    @classmethod
    def from_density(cls, rho, dx: float, origin_index: int,
                     origin_offset: float = 0.0) -> "LagrangianTracker":
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < 0.0):
            raise ValueError("density must be nonnegative")
        cum = np.concatenate([[0.0], np.cumsum(rho * dx)])
        y = origin_offset + (cum - cum[origin_index])
        return cls(y, float(origin_offset), int(origin_index))

    def y_at(self, cell_index, frac):
        """``y`` at fractional position ``frac`` in ``[0, 1]`` across a cell."""
        yl = self.interface_y[cell_index]
        yr = self.interface_y[np.asarray(cell_index) + 1]
        return yl + (yr - yl) * frac


def update_lagrangian(tracker: LagrangianTracker, field, mass_flux_at_origin: float,
                      dt: float) -> LagrangianTracker:
    """Advance the tracker to ``field`` after a step of length ``dt``.

    ``mass_flux_at_origin`` is the mass that crossed ``x = 0`` during the
    step (flux times ``dt``).
    """
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    offset = tracker.origin_offset - mass_flux_at_origin
    return LagrangianTracker.from_density(field.rho, field.dx, tracker.origin_index, offset)


def _gauss(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def entropy_cell_averages(profile: EntropyProfile, tracker: LagrangianTracker, t: float,
                          quadrature_order: int = 4):
    """Cell averages of ``sigma~(y(x), t)`` with ``y`` linear inside each cell."""
    n = tracker.interface_y.size - 1
    if profile.is_constant:
        return np.full(n, profile.mean)
    frac, w = _gauss(quadrature_order)
    yl = tracker.interface_y[:-1, None]
    yr = tracker.interface_y[1:, None]
    y = yl + (yr - yl) * frac[None, :]
    dev = heat_solution(profile, y, t) - profile.mean
    return profile.mean + dev @ w


def entropy_cell_average(profile: EntropyProfile, tracker: LagrangianTracker, t: float,
                         cell_index: int, quadrature_order: int = 4) -> float:
    if profile.is_constant:
        return profile.mean
    frac, w = _gauss(quadrature_order)
    y = tracker.y_at(cell_index, frac)
    return float(profile.mean + (heat_solution(profile, y, t) - profile.mean) @ w)
