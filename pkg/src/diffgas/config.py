"""INI-style run configuration.

Sections ``gas``, ``grid``, ``scheme``, ``profile``, ``initial`` and
``diagnostics``.  ``gamma`` and ``gas_const`` have no defaults.

Example::

    [gas]
    gamma = 1.4
    gas_const = 1.0

    [grid]
    n_cells = 256
    x_left = 0.0
    x_right = 6.283185307179586
    boundary = periodic

    [scheme]
    kind = godunov
    cfl = 0.45
    t_end = 50

    [profile]
    type = cos
    amplitude = 0.2

    [initial]
    generator = riemann-step
    x0 = 3.141592653589793
    rho_left = 1.2
    rho_right = 0.8
"""
from __future__ import annotations

import configparser
import dataclasses
from pathlib import Path

import numpy as np

from .entropy_transport import DEFAULT_MODES, EntropyProfile
from .initial import GENERATORS
from .scheme import ConfigError, DiagnosticsToggles, RunConfig
from .thermo import GasConstants

SECTIONS = ("gas", "grid", "scheme", "profile", "initial", "diagnostics")


def _float(section, key, default=None):
    if key not in section:
        if default is None:
            raise ConfigError(f"missing [{section.name}] {key}")
        return default
    try:
        return float(section[key])
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] {key}: {exc}") from None


def _int(section, key, default=None):
    val = _float(section, key, None if default is None else float(default))
    if val != int(val):
        raise ConfigError(f"[{section.name}] {key} must be an integer")
    return int(val)


def _bool(section, key, default):
    if key not in section:
        return default
    try:
        return section.getboolean(key)
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] {key}: {exc}") from None


def _pairs(text: str):
    """Parse ``"k:v, k:v"`` into a list of ``(int, str)``."""
    out = []
    for item in text.replace(";", ",").split(","):
        item = item.strip()
        if not item:
            continue
        key, _, rest = item.partition(":")
        if not rest:
            raise ConfigError(f"expected 'mode:value', got {item!r}")
        try:
            out.append((int(key), rest.strip()))
        except ValueError:
            raise ConfigError(f"bad mode number in {item!r}") from None
    return out


def square_profile(amplitude: float, mean: float = 0.0, width: float = 0.5,
                   smoothing: float = 0.01, n_modes: int = DEFAULT_MODES) -> EntropyProfile:
    """Mean-preserving square pulse of relative ``width``, heat-smoothed for time ``smoothing``."""
    if not 0.0 < width < 1.0:
        raise ConfigError("square width must lie in (0, 1)")
    coeffs: dict[int, complex] = {0: mean}
    for kk in range(1, n_modes + 1):
        c = amplitude * np.sin(kk * np.pi * width) / (np.pi * kk) * np.exp(-kk * kk * smoothing)
        if abs(c) > 1e-16:
            coeffs[kk] = c
    return EntropyProfile.from_coefficients(coeffs)


def build_profile(section) -> EntropyProfile:
    kind = section.get("type", "constant").strip()
    try:
        if kind == "constant":
            return EntropyProfile.constant(_float(section, "value", 0.0))
        if kind == "cos":
            return EntropyProfile.cosine(
                _float(section, "amplitude", 1.0),
                _int(section, "mode", 1),
                _float(section, "mean", 0.0),
                _float(section, "phase", 0.0),
            )
        if kind == "multi-mode":
            coeffs: dict[int, complex] = {0: _float(section, "mean", 0.0)}
            for kk, val in _pairs(section.get("modes", "")):
                if kk < 1:
                    raise ConfigError("multi-mode wavenumbers must be positive")
                amp, _, phase = val.partition(":")
                c = 0.5 * float(amp) * np.exp(1j * float(phase or 0.0))
                coeffs[kk] = coeffs.get(kk, 0j) + c
            return EntropyProfile.from_coefficients(coeffs)
        if kind == "square-smoothed":
            return square_profile(
                _float(section, "amplitude", 1.0),
                _float(section, "mean", 0.0),
                _float(section, "width", 0.5),
                _float(section, "smoothing", 0.01),
                _int(section, "n_modes", DEFAULT_MODES),
            )
        if kind == "coefficients":
            coeffs = {kk: complex(v.replace(" ", "")) for kk, v in _pairs(section.get("coeffs", ""))}
            return EntropyProfile.from_coefficients(coeffs)
    except ValueError as exc:
        raise ConfigError(f"[profile]: {exc}") from None
    raise ConfigError(f"unknown profile type {kind!r}")


def build_initial(section):
    name = section.get("generator")
    if name is None:
        raise ConfigError("missing [initial] generator")
    if name not in GENERATORS:
        raise ConfigError(f"unknown initial generator {name!r}")
    kwargs = {}
    for key in section:
        if key == "generator":
            continue
        kwargs[key] = _int(section, key) if key == "mode" else _float(section, key)
    try:
        return GENERATORS[name](**kwargs)
    except TypeError as exc:
        raise ConfigError(f"[initial] {name}: {exc}") from None


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    unknown = set(cp.sections()) - set(SECTIONS)
    if unknown:
        raise ConfigError(f"unknown sections: {sorted(unknown)}")
    for name in ("gas", "grid", "scheme", "initial"):
        if name not in cp:
            raise ConfigError(f"missing section [{name}]")
    gas, grid, sch = cp["gas"], cp["grid"], cp["scheme"]
    profile = cp["profile"] if "profile" in cp else cp["DEFAULT"]
    diag = cp["diagnostics"] if "diagnostics" in cp else cp["DEFAULT"]
    try:
        k = GasConstants(_float(gas, "gamma"), _float(gas, "gas_const"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    toggles = DiagnosticsToggles(
        decay=_bool(diag, "decay", False),
        ledger=_bool(diag, "ledger", True),
        entropy=_bool(diag, "entropy", True),
        jump_sum=_bool(diag, "jump_sum", False),
    )
    return RunConfig(
        constants=k,
        profile=build_profile(profile),
        initial=build_initial(cp["initial"]),
        n_cells=_int(grid, "n_cells"),
        t_end=_float(sch, "t_end"),
        x_left=_float(grid, "x_left", 0.0),
        x_right=_float(grid, "x_right", 1.0),
        cfl=_float(sch, "cfl", 0.45),
        scheme=sch.get("kind", "godunov"),
        boundary=grid.get("boundary", "periodic"),
        vacuum_floor=_float(sch, "vacuum_floor", 1e-12),
        snapshot_every=_int(sch, "snapshot_every", 0),
        max_retries=_int(sch, "max_retries", 8),
        quadrature_order=_int(sch, "quadrature_order", 4),
        diagnostics=toggles,
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text())


def with_cells(config: RunConfig, n_cells: int) -> RunConfig:
    return dataclasses.replace(config, n_cells=n_cells)
