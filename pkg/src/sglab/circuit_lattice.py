"""
Discrete dc-SQUID transmission line in SI units.

Each cell carries a ground capacitor ``C_0`` in parallel with a symmetric
dc-SQUID (two junctions of critical current ``I_c``, total capacitance
``C_J``), and neighbouring nodes are joined by an inductor ``L_0``.  The node
fluxes obey

    C Phi_n'' = (Phi_{n+1} - 2 Phi_n + Phi_{n-1}) / L_0
                - (2 pi / Phi_0) E_J(Phi_ext) sin(2 pi Phi_n / Phi_0)

with ``C = C_0 + C_J`` and the flux-tunable SQUID energy
``E_J(Phi_ext) = 2 E_J cos(pi Phi_ext / Phi_0)``, ``E_J = Phi_0 I_c / 2 pi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .constants import ELEMENTARY_CHARGE, FLUX_QUANTUM, SPEED_OF_LIGHT
from .errors import DomainError, StabilityError

#: fraction of the Verlet stability limit 2/omega_max accepted by step_lattice
STABILITY_FACTOR = 0.5

# thresholds used to turn "much greater / much less than one" into flags
STRONG_INEQUALITY = 10.0


@dataclass(frozen=True)
class CircuitParams:
    """Electrical parameters of one cell plus the line layout.

    Defaults are the device values of the proposal: I_c = 2 uA,
    C_J = 1.2 fF, C_0 = 0.8 fF, L_0 = 0.01 nH, a = 6 um, zero bias flux.

    ``boundary`` is ``"periodic"`` or ``"fixed"``; a fixed line is closed by
    two clamped ghost nodes holding ``end_fluxes``.
    """

    critical_current: float = 2e-6
    junction_capacitance: float = 1.2e-15
    ground_capacitance: float = 0.8e-15
    cell_inductance: float = 0.01e-9
    cell_pitch: float = 6e-6
    external_flux: float = 0.0
    cell_count: int = 256
    boundary: str = "periodic"
    end_fluxes: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        for name in ("critical_current", "junction_capacitance", "ground_capacitance",
                     "cell_inductance", "cell_pitch"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")
        if not 0.0 <= self.external_flux < 0.5 * FLUX_QUANTUM:
            raise DomainError(
                "external_flux must lie in [0, Phi_0/2) so the SQUID energy stays positive, "
                f"got {self.external_flux!r} Wb"
            )
        if int(self.cell_count) != self.cell_count or self.cell_count < 3:
            raise DomainError(f"cell_count must be an integer >= 3, got {self.cell_count!r}")
        if self.boundary not in ("periodic", "fixed"):
            raise DomainError(f"boundary must be 'periodic' or 'fixed', got {self.boundary!r}")
        if len(self.end_fluxes) != 2:
            raise DomainError("end_fluxes must hold two values")

    @property
    def total_capacitance(self) -> float:
        return self.ground_capacitance + self.junction_capacitance

    @property
    def periodic(self) -> bool:
        return self.boundary == "periodic"


@dataclass
class LatticeState:
    node_fluxes: np.ndarray
    node_flux_rates: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.node_fluxes = np.array(self.node_fluxes, dtype=np.float64)
        self.node_flux_rates = np.array(self.node_flux_rates, dtype=np.float64)
        if self.node_fluxes.shape != self.node_flux_rates.shape or self.node_fluxes.ndim != 1:
            raise ValueError("node_fluxes and node_flux_rates must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(self.node_fluxes)) and np.all(np.isfinite(self.node_flux_rates))):
            raise ValueError("lattice state contains non-finite values")

    @classmethod
    def at_rest(cls, params: CircuitParams) -> "LatticeState":
        n = params.cell_count
        return cls(np.zeros(n), np.zeros(n), 0.0)

    def copy(self) -> "LatticeState":
        return LatticeState(self.node_fluxes.copy(), self.node_flux_rates.copy(), self.time)


@dataclass(frozen=True)
class DerivedScales:
    effective_josephson_energy: float  # J
    total_capacitance: float  # F
    propagation_velocity: float  # m/s
    effective_mass: float  # rad/s
    plasma_frequency: float  # rad/s

    @property
    def velocity_ratio(self) -> float:
        """c / c_0."""
        return self.propagation_velocity / SPEED_OF_LIGHT

    @property
    def healing_length(self) -> float:
        """Static kink width c/m in meters."""
        return self.propagation_velocity / self.effective_mass


@dataclass
class RegimeReport:
    """Dimensionless validity ratios of the classical continuum description."""

    phase_ratio: float
    amplitude_ratio: float
    continuum_ratio: float
    phase_ok: bool
    amplitude_ok: bool
    continuum_ok: bool
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        # the amplitude flag is informational: soliton runs sweep phi over 2 pi
        return self.phase_ok and self.continuum_ok

    def as_dict(self) -> dict:
        return {
            "phase_ratio": self.phase_ratio,
            "amplitude_ratio": self.amplitude_ratio,
            "continuum_ratio": self.continuum_ratio,
            "phase_ok": self.phase_ok,
            "amplitude_ok": self.amplitude_ok,
            "continuum_ok": self.continuum_ok,
            "notes": list(self.notes),
        }


def josephson_energy(critical_current: float) -> float:
    """Single-junction Josephson energy Phi_0 I_c / 2 pi in joules."""
    return FLUX_QUANTUM * critical_current / (2.0 * math.pi)


def effective_josephson_energy(params: CircuitParams) -> float:
    """Flux-tuned SQUID energy 2 E_J cos(pi Phi_ext / Phi_0)."""
    if not 0.0 <= params.external_flux < 0.5 * FLUX_QUANTUM:
        raise DomainError("external_flux must lie in [0, Phi_0/2)")
    return 2.0 * josephson_energy(params.critical_current) * math.cos(
        math.pi * params.external_flux / FLUX_QUANTUM
    )


def derive_scales(params: CircuitParams) -> DerivedScales:
    ej_eff = effective_josephson_energy(params)
    cap = params.total_capacitance
    c = params.cell_pitch / math.sqrt(params.cell_inductance * cap)
    m = math.sqrt(4.0 * math.pi**2 * ej_eff / (cap * FLUX_QUANTUM**2))
    omega_s = 2.0 * math.pi * math.sqrt(
        josephson_energy(params.critical_current) / (FLUX_QUANTUM**2 * params.junction_capacitance)
    )
    if not c < SPEED_OF_LIGHT:
        raise DomainError(f"line velocity {c:.4e} m/s is not below the vacuum light speed")
    return DerivedScales(ej_eff, cap, c, m, omega_s)


def _chain_coefficients(params: CircuitParams):
    cap = params.total_capacitance
    coupling = 1.0 / (params.cell_inductance * cap)
    freq = 2.0 * math.pi / FLUX_QUANTUM
    amp = freq * effective_josephson_energy(params) / cap
    return coupling, amp, freq


def _check_length(state: LatticeState, params: CircuitParams):
    if state.node_fluxes.shape[0] != params.cell_count:
        raise ValueError(
            f"state has {state.node_fluxes.shape[0]} nodes, params.cell_count = {params.cell_count}"
        )


def lattice_acceleration(state: LatticeState, params: CircuitParams) -> np.ndarray:
    """Node flux accelerations (Wb/s^2) from the Euler-Lagrange equations."""
    _check_length(state, params)
    coupling, amp, freq = _chain_coefficients(params)
    phi = state.node_fluxes
    if params.periodic:
        padded = np.concatenate(([phi[-1]], phi, [phi[0]]))
    else:
        padded = np.concatenate(([params.end_fluxes[0]], phi, [params.end_fluxes[1]]))
    lap = padded[2:] - 2.0 * phi + padded[:-2]
    return coupling * lap - amp * np.sin(freq * phi)


def max_stable_dt(params: CircuitParams) -> float:
    """Largest accepted time step, STABILITY_FACTOR * sqrt(L_0 C) / sqrt(1 + (m a / 2c)^2)."""
    scales = derive_scales(params)
    lc = math.sqrt(params.cell_inductance * params.total_capacitance)
    ratio = scales.effective_mass * params.cell_pitch / (2.0 * scales.propagation_velocity)
    return STABILITY_FACTOR * lc / math.sqrt(1.0 + ratio**2)


def evolve_lattice(state: LatticeState, params: CircuitParams, dt: float, steps: int) -> LatticeState:
    """Advance ``steps`` velocity-Verlet steps; the input state is not modified."""
    _check_length(state, params)
    if not (dt > 0.0 and dt <= max_stable_dt(params)):
        raise StabilityError(
            f"dt = {dt:.6e} s outside (0, {max_stable_dt(params):.6e}] s stability bound"
        )
    coupling, amp, freq = _chain_coefficients(params)
    out = state.copy()
    left, right = params.end_fluxes
    _kernels.sine_chain(out.node_fluxes, out.node_flux_rates, steps, dt, coupling, amp, freq,
                        params.periodic, left, right)
    out.time = state.time + steps * dt
    return out


def step_lattice(state: LatticeState, params: CircuitParams, dt: float) -> LatticeState:
    return evolve_lattice(state, params, dt, 1)


def reversed_rates(state: LatticeState) -> LatticeState:
    """Same configuration with all flux rates negated (time reversal)."""
    return LatticeState(state.node_fluxes.copy(), -state.node_flux_rates, state.time)


def lattice_energy(state: LatticeState, params: CircuitParams) -> float:
    """Total energy in joules, offset so the uniform rest state has zero energy."""
    _check_length(state, params)
    phi = state.node_fluxes
    if params.periodic:
        links = np.diff(np.concatenate((phi, [phi[0]])))
    else:
        links = np.diff(np.concatenate(([params.end_fluxes[0]], phi, [params.end_fluxes[1]])))
    kinetic = 0.5 * params.total_capacitance * np.sum(state.node_flux_rates**2)
    inductive = np.sum(links**2) / (2.0 * params.cell_inductance)
    josephson = effective_josephson_energy(params) * np.sum(
        1.0 - np.cos(2.0 * math.pi * phi / FLUX_QUANTUM)
    )
    return float(kinetic + inductive + josephson)


def dispersion(k, params: CircuitParams):
    """Small-amplitude lattice dispersion omega(k) in rad/s.

    omega^2 = m^2 + (4 c^2 / a^2) sin^2(k a / 2)
    """
    scales = derive_scales(params)
    a = params.cell_pitch
    c = scales.propagation_velocity
    return np.sqrt(scales.effective_mass**2 + (4.0 * c**2 / a**2) * np.sin(0.5 * np.asarray(k) * a) ** 2)


def validate_regime(state: LatticeState, params: CircuitParams, wavelength: float) -> RegimeReport:
    """Check phase regime, small amplitude and continuum limit.

    ``wavelength`` is the shortest length scale of the signal; for a soliton
    pass its width (see :func:`kink_width`).
    """
    charging = (2.0 * ELEMENTARY_CHARGE) ** 2 / (2.0 * params.junction_capacitance)
    phase_ratio = effective_josephson_energy(params) / charging
    amplitude_ratio = float(np.max(np.abs(state.node_fluxes))) / FLUX_QUANTUM if state.node_fluxes.size else 0.0
    continuum_ratio = params.cell_pitch / wavelength if wavelength > 0 else math.inf
    report = RegimeReport(
        phase_ratio=phase_ratio,
        amplitude_ratio=amplitude_ratio,
        continuum_ratio=continuum_ratio,
        phase_ok=phase_ratio >= STRONG_INEQUALITY,
        amplitude_ok=amplitude_ratio <= 1.0 / STRONG_INEQUALITY,
        continuum_ok=continuum_ratio <= 1.0 / STRONG_INEQUALITY,
    )
    if not report.amplitude_ok:
        report.notes.append(
            "flux amplitude is not small compared with Phi_0; expected for soliton signals, "
            "which wind the phase through 2 pi"
        )
    if not report.continuum_ok:
        report.notes.append("cell pitch is not small compared with the signal wavelength")
    if not report.phase_ok:
        report.notes.append("Josephson energy does not dominate the charging energy")
    return report


# --------------------------------------------------------------------------
# kink launch and tracking
# --------------------------------------------------------------------------

def node_positions(params: CircuitParams) -> np.ndarray:
    return params.cell_pitch * np.arange(params.cell_count, dtype=np.float64)


def kink_width(params: CircuitParams, velocity: float = 0.0) -> float:
    """Lorentz-contracted kink width (c/m) sqrt(1 - v^2/c^2) in meters."""
    scales = derive_scales(params)
    c = scales.propagation_velocity
    if not abs(velocity) < c:
        raise DomainError("kink velocity must be below the line propagation velocity")
    return scales.healing_length * math.sqrt(1.0 - (velocity / c) ** 2)


def kink_state(params: CircuitParams, velocity: float, center: float, antikink: bool = False) -> LatticeState:
    """Sample the continuum travelling kink onto the nodes at t = 0."""
    width = kink_width(params, velocity)
    sign = -1.0 if antikink else 1.0
    arg = sign * (node_positions(params) - center) / width
    phase = 4.0 * np.arctan(np.exp(arg))
    phase_x = sign * 2.0 / (width * np.cosh(arg))
    to_flux = FLUX_QUANTUM / (2.0 * math.pi)
    return LatticeState(to_flux * phase, -velocity * to_flux * phase_x, 0.0)


def kink_params(params: CircuitParams, antikink: bool = False) -> CircuitParams:
    """Same circuit, terminated by ghosts clamped at 0 and Phi_0 (2 pi phase)."""
    ends = (FLUX_QUANTUM, 0.0) if antikink else (0.0, FLUX_QUANTUM)
    return replace(params, boundary="fixed", end_fluxes=ends)


def kink_center(state: LatticeState, params: CircuitParams) -> float:
    """Centroid of the phase gradient, sum over links of x_mid * dphi / 2 pi.

    For a fixed line winding once this is the topological-density centre;
    the trapezoid-type sum is exponentially accurate for a smooth kink.
    """
    phi = np.concatenate(([params.end_fluxes[0]], state.node_fluxes, [params.end_fluxes[1]]))
    a = params.cell_pitch
    mid = a * (np.arange(-1, params.cell_count, dtype=np.float64) + 0.5)
    dphi = np.diff(phi)
    return float(np.sum(mid * dphi) / np.sum(dphi))


def refine(params: CircuitParams, factor: int) -> CircuitParams:
    """Split every cell into ``factor`` cells with c and m held fixed.

    Capacitances, inductance and critical current all scale with the cell
    length, so the per-length line constants (and hence c, m) are unchanged.
    """
    s = 1.0 / factor
    return replace(
        params,
        critical_current=params.critical_current * s,
        junction_capacitance=params.junction_capacitance * s,
        ground_capacitance=params.ground_capacitance * s,
        cell_inductance=params.cell_inductance * s,
        cell_pitch=params.cell_pitch * s,
        cell_count=params.cell_count * factor,
    )


def measure_kink_velocity(params: CircuitParams, velocity: float, duration: float,
                          dt_factor: float = 0.1, samples: int = 64,
                          settle_fraction: float = 0.25) -> float:
    """Launch the sampled continuum kink and fit its mean velocity (m/s).

    The kink starts one quarter of the way along a fixed line.  The centre
    is recorded ``samples`` times and a straight line is fitted to the part
    after the initial ``settle_fraction`` of the run.
    """
    fixed = kink_params(params)
    length = params.cell_pitch * params.cell_count
    state = kink_state(fixed, velocity, 0.25 * length)
    dt = dt_factor * math.sqrt(params.cell_inductance * params.total_capacitance)
    total_steps = int(round(duration / dt))
    chunk = max(1, total_steps // samples)
    times, centers = [], []
    for _ in range(samples):
        state = evolve_lattice(state, fixed, dt, chunk)
        times.append(state.time)
        centers.append(kink_center(state, fixed))
    times = np.asarray(times)
    centers = np.asarray(centers)
    keep = times >= settle_fraction * times[-1]
    slope, _ = np.polyfit(times[keep], centers[keep], 1)
    return float(slope)


def energy_drift(times, energies) -> tuple[float, float]:
    """(secular drift, max excursion), both relative to the initial energy.

    The drift is the slope of a least-squares line through E(t) times the
    run length; the excursion is max |E(t) - E(0)|.  Verlet keeps the
    excursion bounded but nonzero, so only the drift measures loss or gain.
    """
    t = np.asarray(times, dtype=np.float64)
    e = np.asarray(energies, dtype=np.float64)
    e0 = abs(e[0])
    slope = np.polyfit(t - t[0], e, 1)[0]
    return float(abs(slope) * (t[-1] - t[0]) / e0), float(np.max(np.abs(e - e[0])) / e0)
