"""
Flat ``key = value`` experiment configs with dotted section names.

    # comment
    command = fig2
    soliton.beta_s = 0.5
    circuit.I_c_uA = 2.0

Every key must appear in :data:`SCHEMA`; anything else is rejected with the
nearest valid key as a hint.  :func:`normalize` fills defaults and
:func:`render` produces the canonical echo written next to every output.
"""

from __future__ import annotations

import difflib
import math
from dataclasses import dataclass
from decimal import Decimal
from pathlib import Path

from .constants import FLUX_QUANTUM

COMMANDS = ("lattice", "kink", "curvature", "coords", "spectrum", "fig2", "sweep")


class ConfigError(ValueError):
    """Config file could not be parsed or validated."""


@dataclass(frozen=True)
class Key:
    kind: type  # float, int, str, bool or list (list of floats)
    default: object
    doc: str
    choices: tuple = ()


SCHEMA: dict[str, Key] = {
    "command": Key(str, None, "experiment to run", COMMANDS),
    "output.dir": Key(str, "", "output directory (overridden by --out)"),
    "output.format": Key(str, "csv", "table format", ("csv", "json")),
    # device (defaults: the proposal's parameter set)
    "circuit.I_c_uA": Key(float, 2.0, "junction critical current [uA]"),
    "circuit.C_J_fF": Key(float, 1.2, "SQUID junction capacitance [fF]"),
    "circuit.C_0_fF": Key(float, 0.8, "capacitance to ground [fF]"),
    "circuit.L_0_nH": Key(float, 0.01, "cell inductance [nH]"),
    "circuit.a_um": Key(float, 6.0, "cell pitch [um]"),
    "circuit.flux_bias": Key(float, 0.0, "SQUID bias flux in units of Phi_0, in [0, 0.5)"),
    "circuit.cells": Key(int, 256, "number of cells"),
    "circuit.boundary": Key(str, "periodic", "line termination for wave runs", ("periodic", "fixed")),
    # elliptic soliton
    "soliton.beta_s": Key(float, 0.5, "spectral parameter in (0, 1)"),
    "soliton.polarity": Key(str, "kink", "kink or antikink", ("kink", "antikink")),
    "soliton.offset": Key(float, 0.0, "centre offset in xi"),
    # lattice command
    "lattice.signal": Key(str, "kink", "launched signal", ("kink", "wave")),
    "lattice.velocity": Key(float, 0.5, "kink velocity in units of c"),
    "lattice.amplitude": Key(float, 1e-3, "standing-wave amplitude in units of Phi_0"),
    "lattice.mode": Key(int, 4, "standing-wave mode number on the ring"),
    # kink command (natural units, c = m = 1)
    "kink.velocity": Key(float, 0.5, "hyperbolic kink velocity in units of c"),
    "kink.widths": Key(float, 20.0, "distance travelled, in kink widths"),
    "grid.points": Key(int, 2048, "samples of the kink grid"),
    "grid.extent": Key(float, 36.0, "length of the kink grid (natural units)"),
    # curvature command
    "curvature.spacing": Key(float, 0.01, "grid spacing of the metric patch"),
    "curvature.rho_min": Key(float, 0.5, "inner edge of the checked |rho| band"),
    "curvature.rho_max": Key(float, 3.0, "outer edge of the checked |rho| band"),
    "curvature.dilaton_spacing": Key(float, 0.05, "grid spacing of the dilaton solve"),
    # coords command
    "coords.points": Key(int, 100, "random exterior points for the pullback test"),
    "coords.T_range": Key(float, 5.0, "|T| range of the random points"),
    # spectrum / fig2
    "spectrum.omega_min": Key(float, 0.05, "lowest Omega in units of beta_s"),
    "spectrum.omega_max": Key(float, 1.0, "highest Omega in units of beta_s"),
    "spectrum.points": Key(int, 20, "number of Omega samples"),
    "spectrum.eps_reg": Key(float, 1e-2, "damping of the overlap integrals, (0, 1e-2]"),
    "spectrum.probe_omega": Key(float, 1.0, "Kruskal-mode frequency of the overlaps"),
    "fig2.beta_step": Key(float, 1e-3, "beta_s grid step for the temperature curves"),
    # numerics
    "numerics.dt_factor": Key(float, 0.1, "lattice dt in units of sqrt(L_0 C)"),
    "numerics.cfl": Key(float, 0.5, "Courant number of field runs"),
    "numerics.steps": Key(int, 10000, "steps of the energy-drift runs"),
    "numerics.snapshots": Key(int, 16, "time-series snapshots written"),
    "numerics.seed": Key(int, 0, "seed for random test points"),
    # check tolerances
    "checks.energy_drift": Key(float, 1e-6, "relative energy drift"),
    "checks.reversibility": Key(float, 1e-10, "time-reversal round trip, relative"),
    "checks.kink_shape": Key(float, 1e-3, "L2 shape error of the travelling kink"),
    "checks.curvature": Key(float, 1e-4, "max |R + 2| on the rho band"),
    "checks.symmetry_slope": Key(float, 1.9, "minimum slope of the symmetry-map residual"),
    "checks.dilaton": Key(float, 1e-8, "dilaton solve residual"),
    "checks.pullback": Key(float, 1e-8, "Kruskal pullback relative error"),
    "checks.tortoise": Key(float, 1e-6, "tortoise derivative relative error"),
    "checks.spectrum": Key(float, 1e-2, "relative Bogoliubov vs closed-form occupation"),
    "checks.planck": Key(float, 5e-3, "relative error of the fitted temperature"),
    "checks.peak": Key(float, 1e-3, "tolerance on the lab-temperature peak position"),
    # sweep
    "sweep.command": Key(str, "fig2", "command run for each value", COMMANDS[:-1]),
    "sweep.parameter": Key(str, "soliton.beta_s", "key that is swept"),
    "sweep.values": Key(list, [0.3, 0.5, 0.7], "comma separated values"),
}


def _suggest(key: str) -> str:
    keys = list(SCHEMA)
    match = difflib.get_close_matches(key, keys, n=1, cutoff=0.0)
    tails = {k.rsplit(".", 1)[-1]: k for k in keys}
    tail_match = difflib.get_close_matches(key.rsplit(".", 1)[-1], list(tails), n=1, cutoff=0.6)
    if tail_match:
        return tails[tail_match[0]]
    return match[0] if match else ""


def _convert(key: str, raw: str, where: str):
    spec = SCHEMA[key]
    try:
        if spec.kind is float:
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError("not finite")
        elif spec.kind is int:
            value = int(raw)
        elif spec.kind is bool:
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError("expected a boolean")
            value = low in ("true", "1", "yes")
        elif spec.kind is list:
            value = [float(x) for x in raw.split(",") if x.strip()]
            if not value:
                raise ValueError("empty list")
        else:
            value = raw
    except ValueError as exc:
        raise ConfigError(f"{where}: bad value {raw!r} for {key} ({exc})") from None
    if spec.choices and value not in spec.choices:
        raise ConfigError(f"{where}: {key} must be one of {', '.join(spec.choices)}, got {raw!r}")
    return value


def parse_text(text: str, source: str = "<config>") -> dict:
    """Parse config text into a {key: value} dict of explicitly set keys."""
    values: dict = {}
    seen_line: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        where = f"{source}:{lineno}"
        if "=" not in stripped:
            raise ConfigError(f"{where}: expected 'key = value', got {stripped!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in SCHEMA:
            hint = _suggest(key)
            raise ConfigError(f"{where}: unknown key {key!r}" + (f" (did you mean {hint!r}?)" if hint else ""))
        if key in values:
            raise ConfigError(f"{where}: duplicate key {key!r} (first set on line {seen_line[key]})")
        values[key] = _convert(key, raw, where)
        seen_line[key] = lineno
    if not values:
        raise ConfigError(f"{source}: config is empty")
    return values


def normalize(values: dict, source: str = "<config>") -> dict:
    """Fill defaults and run cross-field validation."""
    if "command" not in values:
        raise ConfigError(f"{source}: missing required key 'command'")
    cfg = {k: (list(v.default) if isinstance(v.default, list) else v.default) for k, v in SCHEMA.items()}
    cfg.update(values)
    _validate(cfg, source)
    return cfg


def _validate(cfg: dict, source: str):
    def need(cond, msg):
        if not cond:
            raise ConfigError(f"{source}: {msg}")

    for key in ("circuit.I_c_uA", "circuit.C_J_fF", "circuit.C_0_fF", "circuit.L_0_nH", "circuit.a_um"):
        need(cfg[key] > 0.0, f"{key} must be positive")
    need(0.0 <= cfg["circuit.flux_bias"] < 0.5, "circuit.flux_bias must lie in [0, 0.5)")
    need(cfg["circuit.cells"] >= 3, "circuit.cells must be >= 3")
    need(0.0 < cfg["soliton.beta_s"] < 1.0, "soliton.beta_s must lie in (0, 1)")
    need(0.0 < cfg["lattice.velocity"] < 1.0, "lattice.velocity must lie in (0, 1)")
    need(0.0 < cfg["kink.velocity"] < 1.0, "kink.velocity must lie in (0, 1)")
    need(cfg["grid.points"] >= 8, "grid.points must be >= 8")
    need(cfg["grid.extent"] > 0.0, "grid.extent must be positive")
    need(cfg["curvature.spacing"] > 0.0, "curvature.spacing must be positive")
    need(0.0 <= cfg["curvature.rho_min"] < cfg["curvature.rho_max"], "need 0 <= curvature.rho_min < rho_max")
    need(cfg["spectrum.points"] >= 8, "spectrum.points must be >= 8 for the Planck fit")
    need(0.0 < cfg["spectrum.omega_min"] < cfg["spectrum.omega_max"], "need 0 < omega_min < omega_max")
    need(0.0 < cfg["spectrum.eps_reg"] <= 1e-2, "spectrum.eps_reg must lie in (0, 1e-2]")
    need(0.0 < cfg["fig2.beta_step"] < 0.5, "fig2.beta_step must lie in (0, 0.5)")
    need(0.0 < cfg["numerics.cfl"] <= 0.9, "numerics.cfl must lie in (0, 0.9]")
    need(cfg["numerics.dt_factor"] > 0.0, "numerics.dt_factor must be positive")
    need(cfg["numerics.steps"] >= 1 and cfg["numerics.snapshots"] >= 1, "steps and snapshots must be >= 1")
    if cfg["command"] == "sweep":
        param = cfg["sweep.parameter"]
        need(param in SCHEMA and param not in ("command", "sweep.parameter", "sweep.values", "sweep.command"),
             f"sweep.parameter {param!r} is not a sweepable key")
        need(SCHEMA[param].kind in (float, int), f"sweep.parameter {param!r} must be numeric")


def load(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    return normalize(parse_text(text, str(path)), str(path))


def render_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ", ".join(repr(float(v)) for v in value)
    if value is None:
        return ""
    return str(value)


def render(cfg: dict) -> str:
    """Canonical echo: every key, sorted, one per line."""
    return "".join(f"{k} = {render_value(cfg[k])}\n" for k in sorted(cfg))


def _scaled(value: float, exponent: int) -> float:
    """value * 10**exponent rounded once, so 0.8 fF becomes exactly the double nearest 8e-16."""
    return float(Decimal(repr(float(value))).scaleb(exponent))


def circuit_params(cfg: dict, **overrides):
    """CircuitParams from the circuit.* keys."""
    from .circuit_lattice import CircuitParams

    kwargs = dict(
        critical_current=_scaled(cfg["circuit.I_c_uA"], -6),
        junction_capacitance=_scaled(cfg["circuit.C_J_fF"], -15),
        ground_capacitance=_scaled(cfg["circuit.C_0_fF"], -15),
        cell_inductance=_scaled(cfg["circuit.L_0_nH"], -9),
        cell_pitch=_scaled(cfg["circuit.a_um"], -6),
        external_flux=cfg["circuit.flux_bias"] * FLUX_QUANTUM,
        cell_count=cfg["circuit.cells"],
        boundary=cfg["circuit.boundary"],
    )
    kwargs.update(overrides)
    return CircuitParams(**kwargs)


def soliton_spec(cfg: dict):
    from .sg_field import SolitonSpec

    return SolitonSpec(cfg["soliton.beta_s"], cfg["soliton.polarity"], cfg["soliton.offset"])
