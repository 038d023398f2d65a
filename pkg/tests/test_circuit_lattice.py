import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sglab import _kernels
from sglab import circuit_lattice as cl
from sglab.constants import ELEMENTARY_CHARGE, PLANCK
from sglab.errors import DomainError, StabilityError

PHI0 = PLANCK / (2 * ELEMENTARY_CHARGE)
DEFAULT = cl.CircuitParams()


def test_effective_energy_reference_value():
    # E_J = Phi_0 I_c / 2 pi, doubled by the symmetric SQUID at zero bias
    expected = 2 * PHI0 * 2e-6 / (2 * math.pi)
    assert cl.effective_josephson_energy(DEFAULT) == pytest.approx(expected, rel=1e-12)
    assert cl.effective_josephson_energy(DEFAULT) == pytest.approx(1.3164e-21, rel=1e-4)


def test_effective_energy_third_flux_is_half():
    biased = cl.CircuitParams(external_flux=PHI0 / 3)
    assert cl.effective_josephson_energy(biased) == pytest.approx(0.5 * cl.effective_josephson_energy(DEFAULT), rel=1e-12)


def test_effective_energy_vanishes_at_half_flux():
    near = cl.CircuitParams(external_flux=PHI0 / 2 * (1 - 1e-9))
    value = cl.effective_josephson_energy(near)
    assert 0 < value < 1e-8 * cl.effective_josephson_energy(DEFAULT)
    with pytest.raises(DomainError):
        cl.CircuitParams(external_flux=PHI0 / 2)


@pytest.mark.parametrize("field, value", [("critical_current", 0.0), ("cell_pitch", -1e-6),
                                          ("cell_count", 2), ("boundary", "open")])
def test_params_invariants(field, value):
    with pytest.raises(DomainError):
        cl.CircuitParams(**{field: value})


def test_derived_scales_reference_values():
    s = cl.derive_scales(DEFAULT)
    assert s.propagation_velocity == pytest.approx(4.243e7, rel=1e-4)
    assert s.velocity_ratio == pytest.approx(0.1415, abs=1e-4)
    assert s.plasma_frequency == pytest.approx(2.25e12, rel=1e-2)
    # m = sqrt(4 pi^2 E_J(Phi_ext) / (C Phi_0^2)), evaluated directly
    m = math.sqrt(4 * math.pi**2 * (2 * PHI0 * 2e-6 / (2 * math.pi)) / (2e-15 * PHI0**2))
    assert s.effective_mass == pytest.approx(m, rel=1e-12)
    assert s.effective_mass == pytest.approx(2.465e12, rel=1e-3)


def test_derive_scales_is_pure():
    assert cl.derive_scales(DEFAULT) == cl.derive_scales(cl.CircuitParams())


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=0.0, max_value=0.4999))
def test_mass_real_and_positive_below_half_flux(frac):
    s = cl.derive_scales(cl.CircuitParams(external_flux=frac * PHI0))
    assert s.effective_mass > 0 and math.isfinite(s.effective_mass)
    assert s.propagation_velocity < 299792458.0


def test_acceleration_equilibrium():
    st0 = cl.LatticeState.at_rest(DEFAULT)
    assert np.all(cl.lattice_acceleration(st0, DEFAULT) == 0.0)


def test_acceleration_uniform_half_flux():
    st0 = cl.LatticeState(np.full(DEFAULT.cell_count, PHI0 / 2), np.zeros(DEFAULT.cell_count))
    acc = cl.lattice_acceleration(st0, DEFAULT)
    scale = PHI0 / (DEFAULT.cell_inductance * DEFAULT.total_capacitance)
    assert np.max(np.abs(acc)) < 1e-14 * scale


def test_acceleration_single_node_matches_harmonic():
    delta = 1e-6 * PHI0
    phi = np.zeros(DEFAULT.cell_count)
    phi[10] = delta
    acc = cl.lattice_acceleration(cl.LatticeState(phi, np.zeros_like(phi)), DEFAULT)
    s = cl.derive_scales(DEFAULT)
    lc = DEFAULT.cell_inductance * DEFAULT.total_capacitance
    assert acc[10] == pytest.approx(-(2 / lc + s.effective_mass**2) * delta, rel=1e-9)
    assert acc[9] == pytest.approx(delta / lc, rel=1e-12)


def test_fixed_ends_enter_acceleration():
    p = cl.CircuitParams(cell_count=5, boundary="fixed", end_fluxes=(0.0, 1e-18))
    acc = cl.lattice_acceleration(cl.LatticeState.at_rest(p), p)
    assert acc[0] == 0.0
    assert acc[-1] == pytest.approx(1e-18 / (p.cell_inductance * p.total_capacitance))


def test_length_mismatch():
    with pytest.raises(ValueError):
        cl.lattice_acceleration(cl.LatticeState(np.zeros(5), np.zeros(5)), DEFAULT)


def test_step_zero_state(kernel_backend):
    st0 = cl.LatticeState.at_rest(DEFAULT)
    out = cl.step_lattice(st0, DEFAULT, cl.max_stable_dt(DEFAULT))
    assert np.all(out.node_fluxes == 0) and np.all(out.node_flux_rates == 0)


def test_step_rejects_unstable_dt():
    with pytest.raises(StabilityError):
        cl.step_lattice(cl.LatticeState.at_rest(DEFAULT), DEFAULT, 1.01 * cl.max_stable_dt(DEFAULT))


def test_stability_bound_formula():
    s = cl.derive_scales(DEFAULT)
    lc = math.sqrt(DEFAULT.cell_inductance * DEFAULT.total_capacitance)
    ratio = s.effective_mass * DEFAULT.cell_pitch / (2 * s.propagation_velocity)
    assert cl.max_stable_dt(DEFAULT) == pytest.approx(0.5 * lc / math.sqrt(1 + ratio**2), rel=1e-14)


def _zero_crossing_frequency(times, signal):
    idx = np.nonzero(np.diff(np.sign(signal)) != 0)[0]
    t0 = times[idx] - signal[idx] * (times[idx + 1] - times[idx]) / (signal[idx + 1] - signal[idx])
    half_periods = np.diff(t0)
    return math.pi / np.mean(half_periods)


@pytest.mark.parametrize("mode", [1, 8, 40])
def test_standing_wave_dispersion(mode, kernel_backend):
    p = cl.CircuitParams(cell_count=128)
    s = cl.derive_scales(p)
    a = p.cell_pitch
    k = 2 * math.pi * mode / (p.cell_count * a)
    # plane-wave ansatz in the linearised lattice equation
    omega = math.sqrt(s.effective_mass**2 + (4 * s.propagation_velocity**2 / a**2) * math.sin(k * a / 2) ** 2)
    dt = 2 * math.pi / (64 * omega)
    phi = 1e-4 * PHI0 * np.cos(k * a * np.arange(p.cell_count))
    state = cl.LatticeState(phi, np.zeros_like(phi))
    times, trace = [0.0], [state.node_fluxes[0]]
    for _ in range(64 * 20):
        state = cl.step_lattice(state, p, dt)
        times.append(state.time)
        trace.append(state.node_fluxes[0])
    measured = _zero_crossing_frequency(np.array(times), np.array(trace))
    assert measured == pytest.approx(omega, rel=1e-3)
    assert cl.dispersion(k, p) == pytest.approx(omega, rel=1e-14)


def test_time_reversal(kernel_backend):
    p = cl.kink_params(cl.CircuitParams(cell_count=200))
    c = cl.derive_scales(p).propagation_velocity
    start = cl.kink_state(p, 0.4 * c, 60 * p.cell_pitch)
    dt = 0.1 * math.sqrt(p.cell_inductance * p.total_capacitance)
    there = cl.evolve_lattice(start, p, dt, 3000)
    back = cl.reversed_rates(cl.evolve_lattice(cl.reversed_rates(there), p, dt, 3000))
    err = np.max(np.abs(back.node_fluxes - start.node_fluxes)) / np.max(np.abs(start.node_fluxes))
    assert err < 1e-10


@settings(max_examples=10, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_time_reversal_random_states(seed):
    p = cl.CircuitParams(cell_count=32)
    rng = np.random.default_rng(seed)
    dt = 0.1 * math.sqrt(p.cell_inductance * p.total_capacitance)
    rate_scale = PHI0 / math.sqrt(p.cell_inductance * p.total_capacitance)
    start = cl.LatticeState(rng.uniform(-1, 1, 32) * PHI0, rng.uniform(-0.1, 0.1, 32) * rate_scale)
    there = cl.evolve_lattice(start, p, dt, 200)
    back = cl.reversed_rates(cl.evolve_lattice(cl.reversed_rates(there), p, dt, 200))
    assert np.max(np.abs(back.node_fluxes - start.node_fluxes)) < 1e-10 * PHI0


def test_energy_conservation_kink(kernel_backend):
    p = cl.kink_params(cl.CircuitParams(cell_count=400))
    c = cl.derive_scales(p).propagation_velocity
    state = cl.kink_state(p, 0.5 * c, 100 * p.cell_pitch)
    dt = 0.1 * math.sqrt(p.cell_inductance * p.total_capacitance)
    times, energies = [0.0], [cl.lattice_energy(state, p)]
    for _ in range(100):
        state = cl.evolve_lattice(state, p, dt, 100)
        times.append(state.time)
        energies.append(cl.lattice_energy(state, p))
    drift, excursion = cl.energy_drift(times, energies)
    assert drift < 1e-6
    # bounded Verlet oscillation (Peierls-Nabarro modulated), no growth
    assert excursion < 1e-5


def test_energy_is_nonnegative_and_zero_at_rest():
    assert cl.lattice_energy(cl.LatticeState.at_rest(DEFAULT), DEFAULT) == 0.0
    rng = np.random.default_rng(0)
    st1 = cl.LatticeState(rng.normal(size=DEFAULT.cell_count) * PHI0, rng.normal(size=DEFAULT.cell_count))
    assert cl.lattice_energy(st1, DEFAULT) > 0


def test_linearised_limit_matches_harmonic_chain(kernel_backend):
    p = cl.CircuitParams(cell_count=64)
    s = cl.derive_scales(p)
    amp = 5e-4 * PHI0
    phi = amp * np.cos(2 * math.pi * 3 * np.arange(64) / 64)
    start = cl.LatticeState(phi, np.zeros(64))
    dt = 0.1 * math.sqrt(p.cell_inductance * p.total_capacitance)
    nonlinear = cl.evolve_lattice(start, p, dt, 2000)
    x, v = phi.copy(), np.zeros(64)
    _kernels.linear_chain(x, v, 2000, dt, 1 / (p.cell_inductance * p.total_capacitance),
                          np.full(64, s.effective_mass**2), True)
    rel = np.max(np.abs(nonlinear.node_fluxes - x)) / amp
    # leading neglected term is the cubic one, (2 pi amp / Phi_0)^2 / 6 relative
    assert rel < 10 * (2 * math.pi * amp / PHI0) ** 2


def test_validate_regime_reference_parameters():
    rep = cl.validate_regime(cl.LatticeState.at_rest(DEFAULT), DEFAULT, wavelength=1e-3)
    charging = (2 * ELEMENTARY_CHARGE) ** 2 / (2 * 1.2e-15)
    assert rep.phase_ratio == pytest.approx(cl.effective_josephson_energy(DEFAULT) / charging, rel=1e-12)
    assert rep.phase_ratio == pytest.approx(30.77, rel=1e-3)
    assert rep.phase_ok and rep.amplitude_ok and rep.ok
    assert rep.amplitude_ratio == 0.0


def test_validate_regime_continuum_boundary_case():
    rep = cl.validate_regime(cl.LatticeState.at_rest(DEFAULT), DEFAULT, wavelength=6e-6)
    assert rep.continuum_ratio == pytest.approx(1.0)
    assert not rep.continuum_ok and not rep.ok


def test_validate_regime_soliton_amplitude_is_informational():
    p = cl.kink_params(DEFAULT)
    state = cl.kink_state(p, 0.0, 128 * p.cell_pitch)
    rep = cl.validate_regime(state, p, wavelength=1.0)
    assert not rep.amplitude_ok
    assert rep.ok
    assert rep.notes


def test_refine_preserves_line_constants():
    fine = cl.refine(DEFAULT, 4)
    a, b = cl.derive_scales(DEFAULT), cl.derive_scales(fine)
    assert b.propagation_velocity == pytest.approx(a.propagation_velocity, rel=1e-14)
    assert b.effective_mass == pytest.approx(a.effective_mass, rel=1e-14)
    assert fine.cell_count * fine.cell_pitch == pytest.approx(DEFAULT.cell_count * DEFAULT.cell_pitch)


def test_kink_center_of_static_kink():
    p = cl.kink_params(cl.CircuitParams(cell_count=200))
    center = 93.3 * p.cell_pitch
    state = cl.kink_state(p, 0.0, center)
    assert cl.kink_center(state, p) == pytest.approx(center, rel=1e-9)
