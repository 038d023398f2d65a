"""
Batch front-end.

    sglab --config fig2.cfg --out results/fig2
    sglab --config sweep.cfg --jobs 4
    sglab --config kink.cfg --check

Exit status: 0 when every internal check passes, 1 when any check fails,
2 on a config error (nothing is written in that case).  Every output
directory gets ``config.normalized.txt``, ``VERSION`` and ``summary.json``.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import optimize

from . import __version__
from . import circuit_lattice as cl
from . import config as cfgmod
from . import geometry as geo
from . import hawking as hk
from . import sg_field as sg
from .constants import FLUX_QUANTUM
from .io import write_json, write_table

OUTPUT_ROOT_ENV = "SGLAB_OUTPUT_ROOT"
VERSION_STRING = f"sglab {__version__}"

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG = 0, 1, 2


@dataclass
class RunResult:
    checks: list = field(default_factory=list)
    reports: dict = field(default_factory=dict)

    def check(self, name: str, value: float, tolerance: float, passed: bool | None = None, relation: str = "<"):
        if passed is None:
            if relation == "<":
                passed = bool(value < tolerance)
            elif relation == ">=":
                passed = bool(value >= tolerance)
            else:
                raise ValueError(relation)
        self.checks.append({"name": name, "value": float(value), "tolerance": float(tolerance),
                            "relation": relation, "passed": bool(passed)})

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_lattice(cfg: dict, out: Path, fmt: str) -> RunResult:
    res = RunResult()
    params = cfgmod.circuit_params(cfg)
    scales = cl.derive_scales(params)
    if cfg["lattice.signal"] == "kink":
        params = cl.kink_params(params)
        velocity = cfg["lattice.velocity"] * scales.propagation_velocity
        state = cl.kink_state(params, velocity, 0.25 * params.cell_pitch * params.cell_count)
        wavelength = cl.kink_width(params, velocity)
    else:
        n = np.arange(params.cell_count)
        k_index = cfg["lattice.mode"]
        phi = cfg["lattice.amplitude"] * FLUX_QUANTUM * np.cos(2 * math.pi * k_index * n / params.cell_count)
        state = cl.LatticeState(phi, np.zeros_like(phi))
        wavelength = params.cell_pitch * params.cell_count / max(k_index, 1)

    regime = cl.validate_regime(state, params, wavelength)
    res.reports["regime"] = regime.as_dict()
    res.reports["derived_scales"] = {
        "effective_josephson_energy_J": scales.effective_josephson_energy,
        "propagation_velocity_m_s": scales.propagation_velocity,
        "velocity_ratio": scales.velocity_ratio,
        "effective_mass_rad_s": scales.effective_mass,
        "plasma_frequency_rad_s": scales.plasma_frequency,
    }
    write_json(out / "regime.json", regime.as_dict())

    dt = cfg["numerics.dt_factor"] * math.sqrt(params.cell_inductance * params.total_capacitance)
    steps = cfg["numerics.steps"]
    snaps = cfg["numerics.snapshots"]
    energy_samples = max(snaps, 200)
    x = cl.node_positions(params)
    rows, times, energies = [], [state.time], [cl.lattice_energy(state, params)]

    def snapshot(s):
        for i in range(params.cell_count):
            rows.append((s.time, i, s.node_fluxes[i], s.node_flux_rates[i]))

    snapshot(state)
    initial = state
    done, next_snap = 0, 1
    while done < steps:
        chunk = min(max(1, steps // energy_samples), steps - done)
        state = cl.evolve_lattice(state, params, dt, chunk)
        done += chunk
        times.append(state.time)
        energies.append(cl.lattice_energy(state, params))
        if done * snaps >= next_snap * steps:
            snapshot(state)
            next_snap += 1
    write_table(out / "lattice_timeseries", ("time", "node", "flux", "flux_rate"), rows, fmt)

    drift, excursion = cl.energy_drift(times, energies)
    res.check("energy_drift", drift, cfg["checks.energy_drift"])
    res.reports["energy_excursion"] = excursion

    back = cl.reversed_rates(cl.evolve_lattice(cl.reversed_rates(state), params, dt, steps))
    rt = float(np.max(np.abs(back.node_fluxes - initial.node_fluxes)) / np.max(np.abs(initial.node_fluxes)))
    res.check("time_reversal", rt, cfg["checks.reversibility"])
    if cfg["lattice.signal"] == "kink":
        res.reports["kink_center_m"] = cl.kink_center(state, params)
        res.reports["kink_width_m"] = wavelength
    res.reports["node_positions_m"] = [float(x[0]), float(x[-1])]
    return res


def cmd_kink(cfg: dict, out: Path, fmt: str) -> RunResult:
    res = RunResult()
    v = cfg["kink.velocity"]
    grid = sg.Grid1D.spanning(-0.5 * cfg["grid.extent"], 0.5 * cfg["grid.extent"], cfg["grid.points"])
    width = sg.kink_width(v)
    distance = cfg["kink.widths"] * width
    x0 = -0.5 * distance
    state0 = sg.clamp_ends(sg.hyperbolic_kink(grid, v, x0), 0.0, 2.0 * math.pi)
    duration = distance / v
    steps = max(1, int(math.ceil(duration / (cfg["numerics.cfl"] * grid.spacing))))
    dt = duration / steps
    snaps = cfg["numerics.snapshots"]

    rows = []
    state = state0
    x = grid.points
    done = 0
    for k in range(snaps + 1):
        if k:
            target = (k * steps) // snaps
            state = sg.evolve_hyperbolic(state, 1.0, 1.0, dt, target - done)
            done = target
        for i in range(grid.point_count):
            rows.append((state.time, x[i], state.phi[i], state.phi_rate[i]))
    write_table(out / "kink_timeseries", ("time", "position", "phi", "phi_rate"), rows, fmt)

    err = sg.kink_l2_error(state, v, x0)
    res.check("kink_shape_l2", err, cfg["checks.kink_shape"])
    res.check("topological_charge", abs(sg.topological_charge(state) - 1.0), 1e-15,
              passed=sg.topological_charge(state) == sg.topological_charge(state0))

    dt_e = cfg["numerics.cfl"] * grid.spacing
    e_steps = cfg["numerics.steps"]
    samples = 100
    s = state0
    times, energies = [0.0], [sg.field_energy(s)]
    for k in range(samples):
        n = (e_steps * (k + 1)) // samples - (e_steps * k) // samples
        s = sg.evolve_hyperbolic(s, 1.0, 1.0, dt_e, n)
        times.append(s.time)
        energies.append(sg.field_energy(s))
    drift, excursion = cl.energy_drift(times, energies)
    res.check("energy_drift", drift, cfg["checks.energy_drift"])
    res.reports.update(kink_width=width, distance=distance, dt=dt, steps=steps, energy_excursion=excursion)
    return res


def _dilaton_audit(spec: sg.SolitonSpec, h: float):
    tau = h * np.arange(-20, 21)
    xi = spec.center_offset + h * np.arange(-int(round(6.0 / h)), int(round(6.0 / h)) + 1)
    phi = sg.soliton_patch(spec, tau, xi)
    exact = spec.phi_xi(tau[:, None], xi[None, :])
    guess = exact.copy()
    guess[1:-1, 1:-1] = 0.0
    sol = sg.solve_dilaton(phi, guess, h, h)
    report = sg.symmetry_map_check(phi, sol.psi, h, h)
    return sol, report, float(np.max(np.abs(sol.psi - exact)))


def cmd_curvature(cfg: dict, out: Path, fmt: str) -> RunResult:
    res = RunResult()
    spec = cfgmod.soliton_spec(cfg)
    h = cfg["curvature.spacing"]
    band_edges = (cfg["curvature.rho_min"], cfg["curvature.rho_max"])
    patch, resid, band = geo.soliton_curvature_residual(spec, h, band_edges)
    err = float(np.max(np.abs(resid[band])))
    _, resid_half, band_half = geo.soliton_curvature_residual(spec, 0.5 * h, band_edges)
    err_half = float(np.max(np.abs(resid_half[band_half])))
    order = math.log2(err / err_half)

    ricci = resid - 2.0
    rows = []
    for i, t in enumerate(patch.x0):
        for j, xv in enumerate(patch.x1):
            masked = bool(patch.mask[i, j]) or not math.isfinite(resid[i, j])
            rows.append((float(t), float(xv), float(ricci[i, j]), float(resid[i, j]), int(masked)))
    write_table(out / "curvature", ("tau", "xi", "R", "residual", "mask"), rows, fmt)
    write_table(out / "metric", ("tau", "xi", "g_00", "g_11", "g_01", "mask"), patch.rows(), fmt)

    res.check("curvature_max_residual", err, cfg["checks.curvature"])
    res.reports["curvature_order"] = order
    res.reports["curvature_residual_half_spacing"] = err_half

    sol, sym, psi_err = _dilaton_audit(spec, cfg["curvature.dilaton_spacing"])
    write_json(out / "dilaton_residuals.json", {**sol.as_dict(), "symmetry_map": sym.as_dict(),
                                                  "max_error_vs_translation_mode": psi_err})
    res.check("dilaton_residual", sol.residual, cfg["checks.dilaton"])
    res.check("symmetry_map_slope", sym.slope, cfg["checks.symmetry_slope"], relation=">=")
    return res


def cmd_coords(cfg: dict, out: Path, fmt: str) -> RunResult:
    res = RunResult()
    spec = cfgmod.soliton_spec(cfg)
    b = spec.beta_s

    rho = np.linspace(-6.0, 6.0, 241)
    r, f, near = geo.to_schwarzschild(spec, rho)
    write_table(out / "schwarzschild", ("rho", "r", "f", "exterior", "near_horizon"),
                zip(rho, r, f, (r < b).astype(int), near.astype(int)), fmt)

    rr = np.linspace(0.0, 0.95 * b, 96)
    step = 1e-5 * b
    rr_in = rr[(rr - 2 * step >= 0.0)]
    rs = geo.tortoise(rr_in, b)
    deriv = (geo.tortoise(rr_in - 2 * step, b) - 8 * geo.tortoise(rr_in - step, b)
             + 8 * geo.tortoise(rr_in + step, b) - geo.tortoise(rr_in + 2 * step, b)) / (12 * step)
    exact = 1.0 / (b * b - rr_in * rr_in)
    rel = np.abs(deriv / exact - 1.0)
    write_table(out / "tortoise", ("r", "r_star", "dr_star_dr_numeric", "dr_star_dr_exact", "rel_error"),
                zip(rr_in, rs, deriv, exact, rel), fmt)
    res.check("tortoise_derivative", float(np.max(rel)), cfg["checks.tortoise"])
    res.check("tortoise_monotone", float(np.min(np.diff(rs))), 0.0, passed=bool(np.all(np.diff(rs) > 0)),
              relation=">=")

    rng = np.random.default_rng(cfg["numerics.seed"])
    n = cfg["coords.points"]
    r_pts = rng.uniform(0.0, 0.99 * b, n)
    T_pts = rng.uniform(-cfg["coords.T_range"], cfg["coords.T_range"], n)
    r_star = geo.tortoise(r_pts, b)
    kp = geo.kruskal(T_pts, r_star, b)
    r_back = geo.kruskal_radius(kp.u, kp.v, b)
    pull = geo.kruskal_pullback(T_pts, r_star, b)
    per_point = np.max(np.abs(pull.pulled - pull.tortoise_form), axis=1) / np.abs(pull.tortoise_form[:, 0])
    write_table(out / "kruskal", ("T", "r_star", "r", "u", "v", "r_roundtrip", "pullback_rel_error"),
                zip(T_pts, r_star, r_pts, kp.u, kp.v, r_back, per_point), fmt)
    res.check("kruskal_pullback", pull.max_rel_error, cfg["checks.pullback"])
    res.check("kruskal_radius_roundtrip", float(np.max(np.abs(r_back - r_pts))), 1e-10)
    res.check("kruskal_positive", float(min(kp.u.min(), kp.v.min())), 0.0,
              passed=bool(np.all(kp.u > 0) and np.all(kp.v > 0)), relation=">=")

    # cross-check r(rho) and the differential T(tau, rho): pull the Schwarzschild
    # form back to (tau, rho) with dT/drho from quadrature and compare with the soliton metric
    rh = geo.horizon_rho(spec)
    rho_c = np.linspace(rh + 0.3, rh + 3.0, 10)
    ref = rh + 4.0
    d = 1e-4
    h_num = np.array([
        -(geo.schwarzschild_time(spec, 0.0, x + d, ref) - geo.schwarzschild_time(spec, 0.0, x - d, ref))
        / (2 * d * b) for x in rho_c
    ])
    pulled = np.stack(geo.schwarzschild_pullback(spec, rho_c, h_num), axis=-1)
    target = np.stack(geo.soliton_metric_tau_rho(spec, rho_c), axis=-1)
    cross = float(np.max(np.abs(pulled - target)) / np.max(np.abs(target)))
    res.check("schwarzschild_crosscheck", cross, 1e-6)

    hz = geo.horizon(spec)
    consistency = {
        "beta_s": b,
        "r_horizon": hz.r_horizon,
        "rho_horizon": rh,
        "kruskal_factor_at_horizon": hz.kruskal_factor_at_horizon,
        "kruskal_factor_expected": 4 * b * b,
        "printed_null_form_sign": pull.printed_convention_sign,
        "pinned_kruskal_sign": geo.KRUSKAL_SIGN,
        "pullback_max_rel_error": pull.max_rel_error,
        "tortoise_max_rel_error": float(np.max(rel)),
        "schwarzschild_crosscheck": cross,
        "core_radius": 1.0 / spec.gamma,
    }
    write_json(out / "consistency.json", consistency)
    res.reports["consistency"] = consistency
    return res


def _controls(cfg):
    return hk.QuadratureControls(eps_reg=cfg["spectrum.eps_reg"], probe_omega=cfg["spectrum.probe_omega"])


def _spectrum_rows(cfg, beta_s):
    grid = beta_s * np.linspace(cfg["spectrum.omega_min"], cfg["spectrum.omega_max"], cfg["spectrum.points"])
    closed = hk.occupation_spectrum(beta_s, grid)
    oracle = hk.bogoliubov_spectrum(beta_s, grid, _controls(cfg))
    diff = np.abs(oracle.occupation - closed.occupation)
    return grid, closed, oracle, diff


def cmd_spectrum(cfg: dict, out: Path, fmt: str) -> RunResult:
    res = RunResult()
    b = cfg["soliton.beta_s"]
    grid, closed, oracle, diff = _spectrum_rows(cfg, b)
    write_table(out / "spectrum", ("omega", "occupation", "occupation_bogoliubov", "abs_diff"),
                zip(grid, closed.occupation, oracle.occupation, diff), fmt)
    rel = float(np.max(diff / closed.occupation))
    res.check("bogoliubov_vs_closed_form", rel, cfg["checks.spectrum"])
    ratio_err = float(np.max(np.abs(oracle.diagnostics["ratio"] / np.exp(-2 * np.pi * grid / b) - 1.0)))
    res.check("bogoliubov_ratio", ratio_err, cfg["checks.spectrum"])
    t_err = abs(oracle.fitted_temperature / float(hk.comoving_temperature(b)) - 1.0)
    res.check("planck_fit_oracle", t_err, cfg["checks.spectrum"])
    res.reports.update(fitted_temperature=oracle.fitted_temperature, fit_rms=oracle.fit_rms,
                       expected_temperature=float(hk.comoving_temperature(b)))
    return res


def cmd_fig2(cfg: dict, out: Path, fmt: str) -> RunResult:
    res = RunResult()
    step = cfg["fig2.beta_step"]
    betas = step * np.arange(1, int(math.floor((1.0 - 1e-12) / step)) + 1)
    betas = betas[betas < 1.0]
    scales = cl.derive_scales(cfgmod.circuit_params(cfg))
    reports = [hk.temperatures(float(bv), scales) for bv in betas]
    t_co = np.array([r.T_comoving for r in reports])
    t_lab = np.array([r.T_lab for r in reports])
    write_table(out / "fig2a_temperature", ("beta_s", "T_comoving", "T_lab", "T_lab_SI", "power_SI"),
                ((r.beta_s, r.T_comoving, r.T_lab, r.T_lab_SI, r.power_SI) for r in reports), fmt)

    slope, intercept = np.polyfit(betas, t_co, 1)
    res.check("comoving_slope", abs(slope * 2 * math.pi - 1.0), 1e-12)
    res.check("comoving_intercept", abs(intercept), 1e-12)
    res.check("lab_below_comoving", float(np.max(t_lab - t_co)), 0.0, passed=bool(np.all(t_lab < t_co)))
    peak_grid = float(betas[int(np.argmax(t_lab))])
    refined = optimize.minimize_scalar(lambda x: -float(hk.lab_temperature(x)), bounds=(step, 1 - step),
                                       method="bounded", options={"xatol": 1e-10})
    res.check("lab_peak_position", abs(peak_grid - hk.lab_peak_beta()), cfg["checks.peak"])
    # T_lab ~ beta near 0 and ~ sqrt(1 - beta) near 1; probe both limits off-grid
    limits = hk.lab_temperature(np.array([1e-12, 1.0 - 1e-12]))
    res.check("lab_vanishes_at_endpoints", float(limits.max() / t_lab.max()), 1e-4)

    b = cfg["soliton.beta_s"]
    grid, closed, oracle, diff = _spectrum_rows(cfg, b)
    write_table(out / "fig2b_spectrum", ("omega", "occupation", "occupation_bogoliubov", "abs_diff"),
                zip(grid, closed.occupation, oracle.occupation, diff), fmt)
    res.check("spectrum_decreasing", float(np.max(np.diff(closed.occupation))), 0.0,
              passed=bool(np.all(np.diff(closed.occupation) < 0)))
    T_fit, rms = hk.planck_fit(grid, closed.occupation)
    target = float(hk.comoving_temperature(b))
    res.check("planck_fit", abs(T_fit / target - 1.0), cfg["checks.planck"])
    res.check("planck_fit_oracle", abs(oracle.fitted_temperature / target - 1.0), cfg["checks.planck"])

    peak_report = hk.temperatures(hk.lab_peak_beta(), scales)
    chosen = hk.temperatures(b, scales)
    res.reports.update(
        lab_peak_beta_grid=peak_grid,
        lab_peak_beta_refined=float(refined.x),
        lab_peak_T=float(hk.lab_temperature(hk.lab_peak_beta())),
        planck_T=T_fit, planck_rms=rms,
        si_convention=chosen.unit_convention,
        si_mass_rad_s=scales.effective_mass,
        T_comoving_SI_at_beta=chosen.T_comoving_SI,
        T_lab_SI_at_beta=chosen.T_lab_SI,
        T_lab_SI_peak=peak_report.T_lab_SI,
        few_mK_claim_consistent=bool(1e-3 <= peak_report.T_lab_SI <= 1e-2),
    )
    return res


COMMAND_TABLE = {
    "lattice": cmd_lattice,
    "kink": cmd_kink,
    "curvature": cmd_curvature,
    "coords": cmd_coords,
    "spectrum": cmd_spectrum,
    "fig2": cmd_fig2,
}


# --------------------------------------------------------------------------
# orchestration
# --------------------------------------------------------------------------

def _write_provenance(cfg: dict, out: Path):
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.normalized.txt").write_text(cfgmod.render(cfg), encoding="utf-8", newline="\n")
    (out / "VERSION").write_text(VERSION_STRING + "\n", encoding="utf-8", newline="\n")


def run_single(cfg: dict, out: Path) -> int:
    out = Path(out)
    _write_provenance(cfg, out)
    result = COMMAND_TABLE[cfg["command"]](cfg, out, cfg["output.format"])
    write_json(out / "summary.json", {
        "command": cfg["command"],
        "version": VERSION_STRING,
        "passed": result.passed,
        "checks": result.checks,
        "reports": result.reports,
    })
    return EXIT_OK if result.passed else EXIT_CHECK_FAILED


def _sweep_child(args):
    cfg, out = args
    return run_single(cfg, Path(out))


def run_sweep(cfg: dict, out: Path, jobs: int = 1) -> int:
    out = Path(out)
    key = cfg["sweep.parameter"]
    kind = cfgmod.SCHEMA[key].kind
    tasks = []
    for i, raw in enumerate(cfg["sweep.values"]):
        value = int(raw) if kind is int else float(raw)
        child = dict(cfg, command=cfg["sweep.command"])
        child[key] = value
        try:
            cfgmod.normalize({k: v for k, v in child.items()})
        except cfgmod.ConfigError as exc:
            raise cfgmod.ConfigError(f"sweep value {value!r} for {key}: {exc}") from None
        tasks.append((child, str(out / f"run_{i:03d}")))
    _write_provenance(cfg, out)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            codes = list(pool.map(_sweep_child, tasks))
    else:
        codes = [_sweep_child(t) for t in tasks]
    write_table(out / "sweep_index", ("index", key, "exit_code", "directory"),
                ((i, t[0][key], c, Path(t[1]).name) for i, (t, c) in enumerate(zip(tasks, codes))), "csv")
    write_json(out / "summary.json", {
        "command": "sweep",
        "version": VERSION_STRING,
        "passed": all(c == EXIT_OK for c in codes),
        "runs": [{"directory": Path(t[1]).name, key: t[0][key], "exit_code": c} for t, c in zip(tasks, codes)],
    })
    return EXIT_OK if all(c == EXIT_OK for c in codes) else EXIT_CHECK_FAILED


def run(cfg: dict, out: Path, jobs: int = 1) -> int:
    if cfg["command"] == "sweep":
        return run_sweep(cfg, out, jobs)
    return run_single(cfg, out)


def resolve_output(args_out: str | None, cfg: dict, config_path: str) -> Path:
    if args_out:
        return Path(args_out)
    if cfg["output.dir"]:
        return Path(cfg["output.dir"])
    root = os.environ.get(OUTPUT_ROOT_ENV, "sglab_out")
    return Path(root) / Path(config_path).stem


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sglab", description=__doc__.split("\n\n")[0].strip())
    p.add_argument("--config", required=True, help="experiment config (key = value lines)")
    p.add_argument("--out", help=f"output directory (default: ${OUTPUT_ROOT_ENV}/<config name>)")
    p.add_argument("--check", action="store_true", help="validate the config, print it normalised, exit")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweep")
    p.add_argument("--version", action="version", version=VERSION_STRING)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = cfgmod.load(args.config)
    except cfgmod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.jobs < 1:
        print("config error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    if args.check:
        sys.stdout.write(cfgmod.render(cfg))
        return EXIT_OK
    out = resolve_output(args.out, cfg, args.config)
    try:
        code = run(cfg, out, args.jobs)
    except cfgmod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    summary = out / "summary.json"
    print(f"{cfg['command']}: {'ok' if code == EXIT_OK else 'CHECK FAILED'} -> {summary}")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
