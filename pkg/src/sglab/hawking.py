"""
Analogue Hawking observables of the soliton black hole.

Closed forms (natural units, frequencies in units of m):

    N(Omega)   = 1 / (exp(2 pi Omega / beta_s) - 1)
    T_comoving = beta_s / 2 pi
    T_lab      = T_comoving sqrt((1 - beta_s) / (1 + beta_s))
    P          = pi (k_B T)^2 / (12 hbar)

plus a Planck fit and an independent numerical route to N(Omega) through
the Bogoliubov overlaps of the exponential Kruskal map u = exp(beta_s u~)/beta_s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

from .constants import BOLTZMANN, HBAR
from .errors import ConvergenceError, DomainError


@dataclass
class SpectrumResult:
    omega_grid: np.ndarray
    occupation: np.ndarray
    fitted_temperature: float = math.nan
    fit_rms: float = math.nan
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class TemperatureReport:
    beta_s: float
    T_comoving: float
    T_lab: float
    T_lab_SI: float = math.nan  # K
    T_comoving_SI: float = math.nan  # K
    power_SI: float = math.nan  # W, from the comoving temperature
    unit_convention: str = "T_SI = hbar * m * T / k_B"


def _check_beta(beta_s):
    b = np.asarray(beta_s, dtype=np.float64)
    if np.any(~(b > 0.0)) or np.any(~(b < 1.0)):
        raise DomainError("beta_s must lie in (0, 1)")
    return b


def occupation(beta_s, omega):
    """Thermal occupation 1 / (exp(2 pi Omega / beta_s) - 1), overflow safe.

    Evaluated as exp(-y) / (1 - exp(-y)) so large y underflows gradually.
    """
    b = _check_beta(beta_s)
    w = np.asarray(omega, dtype=np.float64)
    if np.any(~(w > 0.0)):
        raise DomainError("frequencies must be positive")
    y = 2.0 * np.pi * w / b
    return np.exp(-y) / -np.expm1(-y)


def occupation_spectrum(beta_s: float, omega_grid) -> SpectrumResult:
    grid = np.asarray(omega_grid, dtype=np.float64)
    return SpectrumResult(grid, occupation(beta_s, grid))


def comoving_temperature(beta_s):
    return _check_beta(beta_s) / (2.0 * np.pi)


def lab_temperature(beta_s):
    """Doppler-reduced temperature (beta_s / 2 pi) sqrt((1 - beta_s) / (1 + beta_s))."""
    b = _check_beta(beta_s)
    return b / (2.0 * np.pi) * np.sqrt((1.0 - b) / (1.0 + b))


def lab_peak_beta() -> float:
    """Maximiser of the lab temperature, the positive root of b^2 + b - 1."""
    return 0.5 * (math.sqrt(5.0) - 1.0)


def to_kelvin(T_natural, mass: float):
    """T_SI = hbar m T / k_B, taking the SG mass m (rad/s) as the frequency unit."""
    return HBAR * mass * np.asarray(T_natural, dtype=np.float64) / BOLTZMANN


def radiation_power(T_kelvin):
    """pi (k_B T)^2 / (12 hbar) in watts."""
    return np.pi * (BOLTZMANN * np.asarray(T_kelvin, dtype=np.float64)) ** 2 / (12.0 * HBAR)


def temperatures(beta_s: float, scales=None) -> TemperatureReport:
    """Comoving and lab temperatures; SI values only when DerivedScales are given."""
    t_co = float(comoving_temperature(beta_s))
    t_lab = float(lab_temperature(beta_s))
    if scales is None:
        return TemperatureReport(float(beta_s), t_co, t_lab)
    m = scales.effective_mass
    t_co_si = float(to_kelvin(t_co, m))
    return TemperatureReport(
        float(beta_s), t_co, t_lab,
        T_lab_SI=float(to_kelvin(t_lab, m)),
        T_comoving_SI=t_co_si,
        power_SI=float(radiation_power(t_co_si)),
    )


# --------------------------------------------------------------------------
# Planck fit
# --------------------------------------------------------------------------

def _log_planck(omega, T):
    y = omega / T
    return -y - np.log(-np.expm1(-y))


def planck_fit(omega, occupation_samples, bounds=None) -> tuple[float, float]:
    """Least-squares temperature of N = 1 / (exp(Omega / T) - 1) in log space.

    Returns (T, rms of log residuals).  The search is bracketed around the
    Wien-tail estimate unless ``bounds`` are given.
    """
    w = np.asarray(omega, dtype=np.float64)
    n = np.asarray(occupation_samples, dtype=np.float64)
    if w.shape != n.shape or w.size < 8:
        raise ValueError("need at least 8 (omega, occupation) pairs")
    if np.any(~(n > 0.0)) or np.any(~(w > 0.0)):
        raise ValueError("frequencies and occupations must be positive")
    if np.ptp(w) == 0.0:
        raise ValueError("degenerate samples: all frequencies equal")
    log_n = np.log(n)
    if bounds is None:
        # log(1 + 1/N) = Omega / T exactly for a Planck spectrum
        guess = float(np.median(w / np.log1p(1.0 / n)))
        bounds = (guess / 20.0, guess * 20.0)

    def cost(log_t):
        r = log_n - _log_planck(w, math.exp(log_t))
        return float(np.dot(r, r))

    lo, hi = math.log(bounds[0]), math.log(bounds[1])
    res = optimize.minimize_scalar(cost, bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-13, "maxiter": 500})
    if not res.success:
        raise ConvergenceError(f"Planck fit failed: {res.message}")
    T = math.exp(res.x)
    if min(abs(res.x - lo), abs(res.x - hi)) < 1e-9:
        raise ConvergenceError("Planck fit hit the bracket edge")
    rms = math.sqrt(cost(res.x) / w.size)
    return T, rms


# --------------------------------------------------------------------------
# Bogoliubov oracle
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureControls:
    """Knobs of the oscillatory overlap quadrature.

    ``probe_omega`` is the Kruskal-mode frequency (the ratio |beta/alpha|^2
    does not depend on it).  The damping exp(-eps omega u) is applied with
    ``eps_reg`` and ``eps_reg / 2`` and the log-ratio is Richardson
    extrapolated to eps -> 0.
    """

    eps_reg: float = 1e-2
    probe_omega: float = 1.0
    envelope_tol: float = 1e-12
    nodes_per_period: int = 16
    gauss_order: int = 16
    rtol: float = 1e-9
    max_doublings: int = 12


def _gauss_panels(f, a: float, b: float, panels: int, order: int) -> complex:
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return complex(np.dot(weights, f(nodes)))


def _adaptive(f, a, b, panels0, ctl: QuadratureControls, history: list) -> complex:
    """Double the panel count until successive results agree to rtol."""
    panels = max(1, panels0)
    prev = _gauss_panels(f, a, b, panels, ctl.gauss_order)
    for _ in range(ctl.max_doublings):
        panels *= 2
        cur = _gauss_panels(f, a, b, panels, ctl.gauss_order)
        history.append((panels, abs(cur - prev)))
        if abs(cur - prev) <= ctl.rtol * max(abs(cur), 1e-300):
            return cur
        prev = cur
    raise ConvergenceError("oscillatory quadrature did not converge", history)


def overlap_integral(beta_s: float, Omega: float, omega: float, sign: int, eps: float,
                     ctl: QuadratureControls | None = None, history: list | None = None) -> complex:
    """Regularised overlap  int du~ exp((sign i - eps) omega u(u~)) exp(-i Omega u~).

    ``sign = +1`` gives the positive-frequency (alpha) overlap, ``-1`` the
    negative-frequency (beta) one.  The u~ < 0 half is integrated in u~
    after subtracting its non-decaying constant part (whose integral,
    i / Omega, is added analytically); the u~ > 0 half is integrated in u,
    where the oscillation period is uniform.
    """
    ctl = ctl or QuadratureControls()
    history = [] if history is None else history
    b = beta_s
    p = (sign * 1j - eps) * omega

    # u~ < 0: |exp(p u) - 1| <~ omega e^{b u~} / b, cut where it drops below the envelope tol
    ut_min = math.log(ctl.envelope_tol * b / omega) / b

    def left(ut):
        u = np.exp(b * ut) / b
        return np.expm1(p * u) * np.exp(-1j * Omega * ut)

    span_left = -ut_min
    periods_left = span_left * max(Omega, b) / (2.0 * math.pi) + 1.0
    panels_left = int(math.ceil(periods_left * ctl.nodes_per_period / ctl.gauss_order))
    part_left = _adaptive(left, ut_min, 0.0, panels_left, ctl, history)

    # u~ > 0 <=> u > 1/b; damping exp(-eps omega u) below envelope tol beyond u_max
    u_lo = 1.0 / b
    u_max = max(u_lo * 2.0, -math.log(ctl.envelope_tol) / (eps * omega))

    def right(u):
        return np.exp(p * u) * np.exp(-1j * (Omega / b) * np.log(b * u)) / (b * u)

    periods_right = (u_max - u_lo) * omega / (2.0 * math.pi) + 1.0
    panels_right = int(math.ceil(periods_right * ctl.nodes_per_period / ctl.gauss_order))
    part_right = _adaptive(right, u_lo, u_max, panels_right, ctl, history)

    return part_left + 1j / Omega + part_right


def overlap_integral_exact(beta_s: float, Omega: float, omega: float, sign: int, eps: float) -> complex:
    """Closed form b^(s-1) Gamma(s) p^(-s), s = -i Omega / b, p = (eps - sign i) omega."""
    s = -1j * Omega / beta_s
    p = (eps - sign * 1j) * omega
    log_val = (s - 1.0) * math.log(beta_s) + special.loggamma(s) - s * np.log(p)
    return complex(np.exp(log_val))


def bogoliubov_ratio(beta_s: float, Omega: float, ctl: QuadratureControls | None = None,
                     history: list | None = None) -> float:
    """|beta/alpha|^2 from brute-force overlaps, Richardson extrapolated in eps.

    With damping eps the log-ratio is -(4 Omega / b) atan(1 / eps), linear
    in eps up to O(eps^3), so two-point extrapolation removes the bias.
    """
    ctl = ctl or QuadratureControls()
    logs = []
    for eps in (ctl.eps_reg, 0.5 * ctl.eps_reg):
        a = overlap_integral(beta_s, Omega, ctl.probe_omega, +1, eps, ctl, history)
        bb = overlap_integral(beta_s, Omega, ctl.probe_omega, -1, eps, ctl, history)
        logs.append(2.0 * (math.log(abs(bb)) - math.log(abs(a))))
    return math.exp(2.0 * logs[1] - logs[0])


def bogoliubov_spectrum(beta_s: float, omega_grid, ctl: QuadratureControls | None = None,
                        check_refinement: bool = False) -> SpectrumResult:
    """Occupation N = x / (1 - x), x = |beta/alpha|^2, for each Omega in the grid.

    With ``check_refinement`` every point is recomputed with doubled nodes
    per period and the largest relative change of x is stored in
    ``diagnostics['refinement_change']``.
    """
    _check_beta(beta_s)
    ctl = ctl or QuadratureControls()
    if not 0.0 < ctl.eps_reg <= 1e-2:
        raise DomainError("eps_reg must lie in (0, 1e-2]")
    grid = np.asarray(omega_grid, dtype=np.float64)
    if np.any(~(grid > 0.0)):
        raise DomainError("frequencies must be positive")
    history: list = []
    ratios = np.array([bogoliubov_ratio(beta_s, float(w), ctl, history) for w in grid])
    occ = ratios / (1.0 - ratios)
    result = SpectrumResult(grid, occ, diagnostics={"ratio": ratios, "panel_history": history})
    if check_refinement:
        fine = QuadratureControls(**{**ctl.__dict__, "nodes_per_period": 2 * ctl.nodes_per_period})
        ratios_fine = np.array([bogoliubov_ratio(beta_s, float(w), fine) for w in grid])
        result.diagnostics["refinement_change"] = float(np.max(np.abs(ratios_fine / ratios - 1.0)))
    if grid.size >= 8:
        result.fitted_temperature, result.fit_rms = planck_fit(grid, occ)
    return result
