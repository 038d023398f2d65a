"""
Continuum sine-Gordon field theory in natural units.

Hyperbolic problems use c = 1 (and a free dimensionless mass), the elliptic
problems use the rescaled coordinates tau = m t, xi = m x so that

    phi_tau_tau + phi_xi_xi = sin(phi)             (elliptic SG)
    (d_tau^2 + d_xi^2) psi = cos(phi) psi          (dilaton / linearised field)

All spatial derivatives in this module are second-order central differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import _kernels
from .errors import ConvergenceError, DomainError, StabilityError

CFL_LIMIT = 0.9


@dataclass(frozen=True)
class Grid1D:
    origin: float
    spacing: float
    point_count: int

    def __post_init__(self):
        if not self.spacing > 0.0:
            raise DomainError("grid spacing must be positive")
        if int(self.point_count) != self.point_count or self.point_count < 8:
            raise DomainError("grid needs at least 8 points")

    @classmethod
    def spanning(cls, lo: float, hi: float, point_count: int) -> "Grid1D":
        """Grid with both endpoints included."""
        return cls(lo, (hi - lo) / (point_count - 1), point_count)

    @property
    def points(self) -> np.ndarray:
        return self.origin + self.spacing * np.arange(self.point_count, dtype=np.float64)

    @property
    def length(self) -> float:
        return self.spacing * (self.point_count - 1)


@dataclass
class FieldState:
    grid: Grid1D
    phi: np.ndarray
    phi_rate: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.phi = np.array(self.phi, dtype=np.float64)
        self.phi_rate = np.array(self.phi_rate, dtype=np.float64)
        n = self.grid.point_count
        if self.phi.shape != (n,) or self.phi_rate.shape != (n,):
            raise ValueError(f"field arrays must have shape ({n},)")
        if not (np.all(np.isfinite(self.phi)) and np.all(np.isfinite(self.phi_rate))):
            raise ValueError("field state contains non-finite values")

    def copy(self) -> "FieldState":
        return FieldState(self.grid, self.phi.copy(), self.phi_rate.copy(), self.time)

    def scaled(self, factor: float) -> "FieldState":
        return FieldState(self.grid, factor * self.phi, factor * self.phi_rate, self.time)

    def __add__(self, other: "FieldState") -> "FieldState":
        if other.grid != self.grid:
            raise ValueError("cannot add states on different grids")
        return FieldState(self.grid, self.phi + other.phi, self.phi_rate + other.phi_rate, self.time)


@dataclass(frozen=True)
class SolitonSpec:
    """Elliptic 1-soliton with spectral parameter 0 < beta_s < 1."""

    beta_s: float
    polarity: str = "kink"
    center_offset: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.beta_s < 1.0:
            raise DomainError(f"beta_s must lie in (0, 1), got {self.beta_s!r}")
        if self.polarity not in ("kink", "antikink"):
            raise DomainError("polarity must be 'kink' or 'antikink'")

    @property
    def gamma(self) -> float:
        return 1.0 / math.sqrt(1.0 + self.beta_s**2)

    @property
    def sign(self) -> float:
        return 1.0 if self.polarity == "kink" else -1.0

    def rho(self, tau, xi):
        return self.gamma * (np.asarray(xi) - self.beta_s * np.asarray(tau) - self.center_offset)

    def phi(self, tau, xi):
        """Closed form 4 arctan(exp(+-rho)) on any broadcastable (tau, xi)."""
        return 4.0 * np.arctan(np.exp(self.sign * self.rho(tau, xi)))

    def phi_xi(self, tau, xi):
        """d phi / d xi = +-2 gamma sech(rho); also the translation dilaton."""
        return self.sign * 2.0 * self.gamma / np.cosh(self.rho(tau, xi))


@dataclass(frozen=True)
class NaturalUnits:
    """Maps SI line quantities onto tau = m t, xi = m x / c and back."""

    mass: float  # rad/s
    velocity: float  # m/s

    @classmethod
    def from_scales(cls, scales) -> "NaturalUnits":
        return cls(scales.effective_mass, scales.propagation_velocity)

    @property
    def length(self) -> float:
        return self.velocity / self.mass

    @property
    def time(self) -> float:
        return 1.0 / self.mass

    def to_natural(self, length=None, time=None, frequency=None):
        out = []
        if length is not None:
            out.append(np.asarray(length) / self.length)
        if time is not None:
            out.append(np.asarray(time) / self.time)
        if frequency is not None:
            out.append(np.asarray(frequency) / self.mass)
        return out[0] if len(out) == 1 else tuple(out)

    def to_si(self, length=None, time=None, frequency=None):
        out = []
        if length is not None:
            out.append(np.asarray(length) * self.length)
        if time is not None:
            out.append(np.asarray(time) * self.time)
        if frequency is not None:
            out.append(np.asarray(frequency) * self.mass)
        return out[0] if len(out) == 1 else tuple(out)


# --------------------------------------------------------------------------
# closed forms
# --------------------------------------------------------------------------

def elliptic_soliton(spec: SolitonSpec, tau: float, grid: Grid1D) -> FieldState:
    """Sample the elliptic 1-soliton at fixed tau; phi_rate holds d phi / d tau."""
    xi = grid.points
    phi = spec.phi(tau, xi)
    rate = -spec.beta_s * spec.phi_xi(tau, xi)
    return FieldState(grid, phi, rate, float(tau))


def hyperbolic_kink(grid: Grid1D, velocity: float, center: float = 0.0, time: float = 0.0,
                    mass: float = 1.0, c: float = 1.0, antikink: bool = False) -> FieldState:
    """Travelling kink 4 arctan(exp(m (x - x0 - v t) / sqrt(1 - v^2/c^2))) at ``time``."""
    if not abs(velocity) < c:
        raise DomainError("kink velocity must be below c")
    lorentz = 1.0 / math.sqrt(1.0 - (velocity / c) ** 2)
    sign = -1.0 if antikink else 1.0
    arg = sign * mass * lorentz * (grid.points - center - velocity * time) / c
    phi = 4.0 * np.arctan(np.exp(arg))
    phi_x = sign * 2.0 * mass * lorentz / (c * np.cosh(arg))
    return FieldState(grid, phi, -velocity * phi_x, float(time))


def kink_width(velocity: float, mass: float = 1.0, c: float = 1.0) -> float:
    return c * math.sqrt(1.0 - (velocity / c) ** 2) / mass


def topological_charge(state: FieldState) -> float:
    return float((state.phi[-1] - state.phi[0]) / (2.0 * math.pi))


def clamp_ends(state: FieldState, left: float, right: float) -> FieldState:
    out = state.copy()
    out.phi[0], out.phi[-1] = left, right
    out.phi_rate[0] = out.phi_rate[-1] = 0.0
    return out


# --------------------------------------------------------------------------
# hyperbolic evolution
# --------------------------------------------------------------------------

def _check_cfl(c: float, dt: float, dx: float):
    courant = c * dt / dx
    if not (dt > 0.0 and courant <= CFL_LIMIT):
        raise StabilityError(f"Courant number c dt / dx = {courant:.4f} exceeds {CFL_LIMIT}")


def evolve_hyperbolic(state: FieldState, m: float, c: float, dt: float, steps: int,
                      boundary: str = "fixed") -> FieldState:
    """Velocity-Verlet evolution of phi_tt - c^2 phi_xx + m^2 sin(phi) = 0.

    ``boundary="fixed"`` holds the first and last samples at their current
    values; ``"periodic"`` wraps the grid (spacing then closes the ring).
    """
    dx = state.grid.spacing
    _check_cfl(c, dt, dx)
    out = state.copy()
    coupling = (c / dx) ** 2
    if boundary == "periodic":
        _kernels.sine_chain(out.phi, out.phi_rate, steps, dt, coupling, m * m, 1.0, True)
    elif boundary == "fixed":
        inner_phi = out.phi[1:-1].copy()
        inner_rate = out.phi_rate[1:-1].copy()
        _kernels.sine_chain(inner_phi, inner_rate, steps, dt, coupling, m * m, 1.0, False,
                            out.phi[0], out.phi[-1])
        out.phi[1:-1] = inner_phi
        out.phi_rate[1:-1] = inner_rate
        out.phi_rate[0] = out.phi_rate[-1] = 0.0
    else:
        raise ValueError("boundary must be 'fixed' or 'periodic'")
    out.time = state.time + steps * dt
    return out


def field_energy_density(state: FieldState, m: float = 1.0, c: float = 1.0,
                         boundary: str = "fixed") -> np.ndarray:
    """Per-site energy consistent with the semi-discrete equations.

    The gradient term of link (i, i+1) is split evenly between its two sites.
    """
    phi = state.phi
    dx = state.grid.spacing
    if boundary == "periodic":
        links = np.diff(np.concatenate((phi, phi[:1]))) / dx
        grad = 0.25 * c * c * (links**2 + np.roll(links, 1) ** 2)
        rate = state.phi_rate
    else:
        links = np.diff(phi) / dx
        grad = np.zeros_like(phi)
        grad[:-1] += 0.25 * c * c * links**2
        grad[1:] += 0.25 * c * c * links**2
        rate = state.phi_rate.copy()
        rate[0] = rate[-1] = 0.0
    return 0.5 * rate**2 + grad + m * m * (1.0 - np.cos(phi))


def field_energy(state: FieldState, m: float = 1.0, c: float = 1.0, boundary: str = "fixed") -> float:
    """E = sum [phi_t^2/2 + c^2 phi_x^2/2 + m^2 (1 - cos phi)] dx, conserved by the scheme."""
    dens = field_energy_density(state, m, c, boundary)
    if boundary == "fixed":
        # clamped end samples carry no dynamics; only their links count
        dens = dens.copy()
        dens[0] -= m * m * (1.0 - math.cos(state.phi[0]))
        dens[-1] -= m * m * (1.0 - math.cos(state.phi[-1]))
    return float(np.sum(dens) * state.grid.spacing)


def energy_centroid(state: FieldState, m: float = 1.0, c: float = 1.0, boundary: str = "periodic") -> float:
    dens = field_energy_density(state, m, c, boundary)
    return float(np.sum(dens * state.grid.points) / np.sum(dens))


def kink_l2_error(state: FieldState, velocity: float, center: float, mass: float = 1.0,
                  c: float = 1.0) -> float:
    """Discrete L2 norm of (phi - exact translated kink)."""
    exact = hyperbolic_kink(state.grid, velocity, center, state.time, mass, c)
    diff = state.phi - exact.phi
    return float(math.sqrt(np.sum(diff**2) * state.grid.spacing))


# --------------------------------------------------------------------------
# linear perturbations on a soliton background
# --------------------------------------------------------------------------

def _background_weight(background, grid: Grid1D, time: float) -> np.ndarray:
    if isinstance(background, SolitonSpec):
        return np.cos(background.phi(time, grid.points))
    if isinstance(background, FieldState):
        if background.grid != grid:
            raise ValueError("background and perturbation grids differ")
        return np.cos(background.phi)
    raise TypeError("background must be a FieldState (frozen) or a SolitonSpec (closed form)")


def evolve_perturbation(background, perturbation: FieldState, dt: float, steps: int,
                        boundary: str = "fixed") -> FieldState:
    """Evolve phi1_tt = phi1_xx - cos(phi_s) phi1, the real-time form of the linearised field.

    ``background`` is either a FieldState, whose phi is frozen, or a
    SolitonSpec, whose closed form is re-evaluated at every half kick so the
    background moves with the soliton.  ``"fixed"`` boundaries hold phi1 = 0
    at the end samples.
    """
    grid = perturbation.grid
    _check_cfl(1.0, dt, grid.spacing)
    if boundary not in ("fixed", "periodic"):
        raise ValueError("boundary must be 'fixed' or 'periodic'")
    periodic = boundary == "periodic"
    out = perturbation.copy()
    coupling = 1.0 / grid.spacing**2
    sl = slice(None) if periodic else slice(1, -1)
    x = out.phi[sl].copy()
    v = out.phi_rate[sl].copy()
    if isinstance(background, FieldState):
        weight = _background_weight(background, grid, perturbation.time)[sl]
        _kernels.linear_chain(x, v, steps, dt, coupling, weight, periodic)
    else:
        t = perturbation.time
        w_now = _background_weight(background, grid, t)[sl]
        for k in range(steps):
            w_next = _background_weight(background, grid, perturbation.time + (k + 1) * dt)[sl]
            _kernels.linear_chain_step(x, v, dt, coupling, w_now, w_next, periodic)
            w_now = w_next
    out.phi[sl] = x
    out.phi_rate[sl] = v
    if not periodic:
        out.phi[0] = out.phi[-1] = 0.0
        out.phi_rate[0] = out.phi_rate[-1] = 0.0
    out.time = perturbation.time + steps * dt
    return out


# --------------------------------------------------------------------------
# elliptic equation
# --------------------------------------------------------------------------

def elliptic_residual_2d(phi: np.ndarray, dtau: float, dxi: float) -> np.ndarray:
    """phi_tau_tau + phi_xi_xi - sin(phi) on interior points of a (tau, xi) array."""
    phi = np.asarray(phi, dtype=np.float64)
    if phi.ndim != 2 or min(phi.shape) < 3:
        raise ValueError("need a 2-D array with at least 3 samples per axis")
    c = phi[1:-1, 1:-1]
    d_tt = (phi[2:, 1:-1] - 2.0 * c + phi[:-2, 1:-1]) / dtau**2
    d_xx = (phi[1:-1, 2:] - 2.0 * c + phi[1:-1, :-2]) / dxi**2
    return d_tt + d_xx - np.sin(c)


def elliptic_residual(state: FieldState, tau_stencil) -> np.ndarray:
    """Residual of the elliptic SG equation at ``state``'s tau slice.

    ``tau_stencil`` holds the three slices at tau - dtau, tau, tau + dtau;
    the middle one must be ``state`` (or equal to it).  Returns values at
    the interior xi points.
    """
    if len(tau_stencil) != 3:
        raise ValueError("tau_stencil must hold exactly three slices")
    lo, mid, hi = tau_stencil
    for s in (lo, mid, hi):
        if s.grid != state.grid:
            raise ValueError("stencil slices must share the state's grid")
    if not np.array_equal(mid.phi, state.phi):
        raise ValueError("middle stencil slice must be the evaluated state")
    dtau_lo = mid.time - lo.time
    dtau_hi = hi.time - mid.time
    if not (dtau_lo > 0 and math.isclose(dtau_lo, dtau_hi, rel_tol=1e-9)):
        raise ValueError("stencil slices must be uniformly spaced in tau")
    stack = np.vstack([lo.phi, mid.phi, hi.phi])
    return elliptic_residual_2d(stack, 0.5 * (dtau_lo + dtau_hi), state.grid.spacing)[0]


def soliton_patch(spec: SolitonSpec, tau: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Closed-form phi on the tensor grid, shape (len(tau), len(xi))."""
    return spec.phi(np.asarray(tau)[:, None], np.asarray(xi)[None, :])


# --------------------------------------------------------------------------
# dilaton
# --------------------------------------------------------------------------

@dataclass
class DilatonSolution:
    psi: np.ndarray
    residual_history: list[float] = field(default_factory=list)

    @property
    def residual(self) -> float:
        return self.residual_history[-1]

    def as_dict(self) -> dict:
        return {"shape": list(self.psi.shape), "residual_history": list(self.residual_history)}


def _dirichlet_operator(weight_inner: np.ndarray, dtau: float, dxi: float) -> sp.csc_matrix:
    nt, nx = weight_inner.shape
    lap_t = sp.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(nt, nt)) / dtau**2
    lap_x = sp.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(nx, nx)) / dxi**2
    lap = sp.kron(lap_t, sp.identity(nx)) + sp.kron(sp.identity(nt), lap_x)
    return (lap - sp.diags(weight_inner.ravel())).tocsc()


def dilaton_residual(psi: np.ndarray, phi: np.ndarray, dtau: float, dxi: float) -> np.ndarray:
    """(d_tau^2 + d_xi^2) psi - cos(phi) psi on interior points."""
    c = psi[1:-1, 1:-1]
    d_tt = (psi[2:, 1:-1] - 2.0 * c + psi[:-2, 1:-1]) / dtau**2
    d_xx = (psi[1:-1, 2:] - 2.0 * c + psi[1:-1, :-2]) / dxi**2
    return d_tt + d_xx - np.cos(phi[1:-1, 1:-1]) * c


def solve_dilaton(phi: np.ndarray, boundary: np.ndarray, dtau: float, dxi: float,
                  tol: float = 1e-8, max_iter: int = 8) -> DilatonSolution:
    """Solve (d_tau^2 + d_xi^2) psi = cos(phi) psi with Dirichlet data.

    ``phi`` is the background on the full (tau, xi) rectangle; the edges of
    ``boundary`` (same shape) give psi there, its interior is the starting
    guess.  Newton iterations use a sparse LU factorisation of the (linear)
    operator, so after the first step they act as iterative refinement.
    The max-norm residual of every iterate is recorded.
    """
    phi = np.asarray(phi, dtype=np.float64)
    psi = np.array(boundary, dtype=np.float64)
    if phi.shape != psi.shape or phi.ndim != 2 or min(phi.shape) < 3:
        raise ValueError("phi and boundary must be equal-shape 2-D arrays with >= 3 samples per axis")
    op = _dirichlet_operator(np.cos(phi[1:-1, 1:-1]), dtau, dxi)
    lu = spla.splu(op)
    history = [float(np.max(np.abs(dilaton_residual(psi, phi, dtau, dxi))))]
    scale = max(1.0, float(np.max(np.abs(psi))))
    for _ in range(max_iter):
        if history[-1] < tol * scale and len(history) > 1:
            break
        res = dilaton_residual(psi, phi, dtau, dxi)
        psi[1:-1, 1:-1] -= lu.solve(res.ravel()).reshape(res.shape)
        history.append(float(np.max(np.abs(dilaton_residual(psi, phi, dtau, dxi)))))
    if not history[-1] < tol * scale:
        raise ConvergenceError(f"dilaton solve stalled at residual {history[-1]:.3e}", history)
    return DilatonSolution(psi, history)


@dataclass
class SymmetryMapReport:
    epsilons: np.ndarray
    residuals: np.ndarray  # max |F(phi + eps psi) - F(phi)|
    floor: float  # max |F(phi)|, the discretisation floor
    slope: float
    ok: bool

    def as_dict(self) -> dict:
        return {
            "epsilons": self.epsilons.tolist(),
            "residuals": self.residuals.tolist(),
            "floor": self.floor,
            "slope": self.slope,
            "ok": self.ok,
        }


def symmetry_map_check(phi: np.ndarray, psi: np.ndarray, dtau: float, dxi: float,
                       epsilons=(1e-4, 1e-3, 1e-2), min_slope: float = 1.9) -> SymmetryMapReport:
    """Check that phi + eps psi solves the elliptic equation to first order in eps.

    The discretisation floor F(phi) is subtracted pointwise, so what remains
    is eps * (linearised residual of psi) + O(eps^2); a log-log slope near 2
    means the first-order term vanishes.
    """
    eps = np.asarray(epsilons, dtype=np.float64)
    base = elliptic_residual_2d(phi, dtau, dxi)
    res = np.array([
        np.max(np.abs(elliptic_residual_2d(phi + e * psi, dtau, dxi) - base)) for e in eps
    ])
    slope = float(np.polyfit(np.log(eps), np.log(res), 1)[0])
    return SymmetryMapReport(eps, res, float(np.max(np.abs(base))), slope, slope >= min_slope)
