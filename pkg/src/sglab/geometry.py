"""
Soliton-induced two-dimensional geometries.

A solution phi of the elliptic sine-Gordon equation defines the Lorentzian
metric  ds^2 = -sin^2(phi/2) dtau^2 + cos^2(phi/2) dxi^2, whose Ricci scalar
is -2 (in units m = 1).  For the 1-soliton the metric becomes
-sech^2(rho) dtau^2 + tanh^2(rho) dxi^2 and, with r = sech(rho)/gamma, the
Schwarzschild-like form (beta^2 - r^2) dT^2 - dr^2 / (beta^2 - r^2) with a
horizon at r = beta.  This module builds these charts, measures curvature
by finite differences and implements the Schwarzschild -> tortoise ->
Kruskal chain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError
from .sg_field import SolitonSpec

MASK_THRESHOLD = 1e-6
KRUSKAL_OVERFLOW = 700.0

CHARTS = ("soliton", "schwarzschild", "tortoise", "kruskal")

# 4th-order central first derivative weights at offsets -2..2
_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0


@dataclass
class MetricPatch:
    """Metric components sampled on a tensor grid ``x0`` (axis 0) by ``x1`` (axis 1)."""

    chart: str
    x0: np.ndarray
    x1: np.ndarray
    g00: np.ndarray
    g11: np.ndarray
    g01: np.ndarray
    mask: np.ndarray  # True where the chart is degenerate

    def __post_init__(self):
        if self.chart not in CHARTS:
            raise ValueError(f"unknown chart {self.chart!r}")
        shape = (len(self.x0), len(self.x1))
        for name in ("g00", "g11", "g01", "mask"):
            if np.shape(getattr(self, name)) != shape:
                raise ValueError(f"{name} must have shape {shape}")

    @property
    def spacing(self) -> tuple[float, float]:
        return float(self.x0[1] - self.x0[0]), float(self.x1[1] - self.x1[0])

    def rows(self):
        """(x0, x1, g00, g11, g01, mask) tuples in C order."""
        for i, a in enumerate(self.x0):
            for j, b in enumerate(self.x1):
                yield (float(a), float(b), float(self.g00[i, j]), float(self.g11[i, j]),
                       float(self.g01[i, j]), int(bool(self.mask[i, j])))


@dataclass(frozen=True)
class HorizonInfo:
    r_horizon: float
    surface_gravity_proxy: float
    kruskal_factor_at_horizon: float


def horizon(spec: SolitonSpec) -> HorizonInfo:
    """Horizon at r = beta_s; the Kruskal conformal factor there is 4 beta_s^2."""
    b = spec.beta_s
    return HorizonInfo(b, b, (b + b) ** 2)


def _degeneracy_mask(a: np.ndarray, b: np.ndarray, threshold: float) -> np.ndarray:
    return (np.abs(a) < threshold) | (np.abs(b) < threshold)


def metric_from_field(phi: np.ndarray, tau: np.ndarray, xi: np.ndarray,
                      signature: str = "lorentzian", threshold: float = MASK_THRESHOLD) -> MetricPatch:
    """diag(-+sin^2(phi/2), cos^2(phi/2)) from samples phi[tau, xi]."""
    phi = np.asarray(phi, dtype=np.float64)
    if signature not in ("lorentzian", "euclidean"):
        raise ValueError("signature must be 'lorentzian' or 'euclidean'")
    s = np.sin(0.5 * phi)
    c = np.cos(0.5 * phi)
    sign = -1.0 if signature == "lorentzian" else 1.0
    return MetricPatch("soliton", np.asarray(tau, float), np.asarray(xi, float),
                       sign * s * s, c * c, np.zeros_like(phi), _degeneracy_mask(s, c, threshold))


def soliton_metric_closed_form(spec: SolitonSpec, tau: np.ndarray, xi: np.ndarray,
                               threshold: float = MASK_THRESHOLD) -> MetricPatch:
    """-sech^2(rho) dtau^2 + tanh^2(rho) dxi^2 with rho = gamma (xi - beta_s tau - offset)."""
    tau = np.asarray(tau, float)
    xi = np.asarray(xi, float)
    rho = spec.rho(tau[:, None], xi[None, :])
    sech = 1.0 / np.cosh(rho)
    tanh = np.tanh(rho)
    return MetricPatch("soliton", tau, xi, -sech * sech, tanh * tanh, np.zeros_like(rho),
                       _degeneracy_mask(sech, tanh, threshold))


# --------------------------------------------------------------------------
# curvature
# --------------------------------------------------------------------------

def _d1(f: np.ndarray, h: float, axis: int) -> np.ndarray:
    """4th-order central derivative; the two outermost samples on each side become NaN."""
    f = np.moveaxis(f, axis, 0)
    out = np.full_like(f, np.nan)
    n = f.shape[0]
    out[2:n - 2] = (_D1[0] * f[0:n - 4] + _D1[1] * f[1:n - 3]
                    + _D1[3] * f[3:n - 1] + _D1[4] * f[4:n]) / h
    return np.moveaxis(out, 0, axis)


def ricci_scalar(patch: MetricPatch) -> np.ndarray:
    """Ricci scalar of a diagonal 2-metric from finite-difference Christoffel symbols.

    Christoffel symbols come from 4th-order derivatives of the metric, and
    the Ricci tensor R_bd = d_a G^a_bd - d_d G^a_ba + G^a_ae G^e_bd - G^a_de G^e_ba
    from 4th-order derivatives of those.  Samples within 4 points of an edge,
    or within that distance of a masked point, are returned as NaN.
    """
    if np.any(patch.g01 != 0.0):
        raise ValueError("ricci_scalar handles diagonal charts only")
    if min(patch.g00.shape) < 9:
        raise ValueError("need at least 9 samples per axis for the nested 4th-order stencil")
    h = patch.spacing
    g = [patch.g00, patch.g11]
    with np.errstate(divide="ignore", invalid="ignore"):
        ginv = [1.0 / patch.g00, 1.0 / patch.g11]
        dg = [[_d1(g[a], h[c], c) for c in range(2)] for a in range(2)]  # dg[a][c] = d_c g_aa

        # Christoffel G[a][b][c] = 1/2 g^aa (d_b g_ac + d_c g_ab - d_a g_bc), diagonal g
        def christoffel(a, b, c):
            term = np.zeros_like(patch.g00)
            if a == c:
                term = term + dg[a][b]
            if a == b:
                term = term + dg[a][c]
            if b == c:
                term = term - dg[b][a]
            return 0.5 * ginv[a] * term

        gam = [[[christoffel(a, b, c) for c in range(2)] for b in range(2)] for a in range(2)]
        dgam = [[[[_d1(gam[a][b][c], h[d], d) for d in range(2)] for c in range(2)]
                 for b in range(2)] for a in range(2)]

        def ricci(b, d):
            total = np.zeros_like(patch.g00)
            for a in range(2):
                total = total + dgam[a][b][d][a] - dgam[a][b][a][d]
                for e in range(2):
                    total = total + gam[a][a][e] * gam[e][b][d] - gam[a][d][e] * gam[e][b][a]
            return total

        scalar = ginv[0] * ricci(0, 0) + ginv[1] * ricci(1, 1)

    if np.any(patch.mask):
        near = patch.mask.copy()
        for axis in (0, 1):
            for shift in range(1, 5):
                near |= np.roll(patch.mask, shift, axis) | np.roll(patch.mask, -shift, axis)
        scalar[near] = np.nan
    return scalar


def soliton_curvature_residual(spec: SolitonSpec, spacing: float, rho_band=(0.5, 3.0),
                               tau_half_width: int = 6) -> tuple[MetricPatch, np.ndarray, np.ndarray]:
    """R + 2 of the exact soliton metric on a patch covering |rho| <= rho_band[1] + margin.

    Returns (patch, R + 2, band mask) where the band mask selects samples
    with rho_band[0] <= |rho| <= rho_band[1].
    """
    g = spec.gamma
    margin = 6 * spacing
    xi_extent = (rho_band[1] / g) + margin
    n_xi = int(round(2 * xi_extent / spacing)) + 1
    xi = spec.center_offset + spacing * (np.arange(n_xi) - (n_xi - 1) / 2)
    tau = spacing * np.arange(-tau_half_width, tau_half_width + 1)
    patch = soliton_metric_closed_form(spec, tau, xi)
    resid = ricci_scalar(patch) + 2.0
    rho = np.abs(spec.rho(tau[:, None], xi[None, :]))
    band = (rho >= rho_band[0]) & (rho <= rho_band[1]) & np.isfinite(resid)
    return patch, resid, band


# --------------------------------------------------------------------------
# coordinate chain
# --------------------------------------------------------------------------

def schwarzschild_radius(spec: SolitonSpec, rho):
    """r = sech(rho) / gamma."""
    return 1.0 / (spec.gamma * np.cosh(rho))


def to_schwarzschild(spec: SolitonSpec, rho, horizon_tol: float = 1e-9):
    """Return (r, f, near_horizon) with f = beta_s^2 - r^2.

    Both branches are returned: r < beta_s is the exterior used by the
    Hawking chain, beta_s < r <= 1/gamma is the soliton core.
    """
    r = schwarzschild_radius(spec, np.asarray(rho, float))
    f = spec.beta_s**2 - r * r
    return r, f, np.abs(r - spec.beta_s) < horizon_tol


def horizon_rho(spec: SolitonSpec) -> float:
    """|rho| at which r(rho) = beta_s, i.e. sech(rho) = gamma beta_s."""
    return float(np.arccosh(1.0 / (spec.gamma * spec.beta_s)))


def schwarzschild_time_rate(spec: SolitonSpec, rho):
    """h(rho) in dT = dtau - beta_s h(rho) drho.

    h = tanh^2(rho) / (gamma (sech^2 rho - beta_s^2 tanh^2 rho)); it has a pole at the horizon.
    """
    rho = np.asarray(rho, float)
    t2 = np.tanh(rho) ** 2
    s2 = 1.0 / np.cosh(rho) ** 2
    return t2 / (spec.gamma * (s2 - spec.beta_s**2 * t2))


def schwarzschild_time(spec: SolitonSpec, tau: float, rho: float, rho_ref: float) -> float:
    """T(tau, rho) = tau - beta_s * integral_{rho_ref}^{rho} h, by adaptive quadrature.

    ``rho`` and ``rho_ref`` must lie on the same side of the horizon.
    """
    rh = horizon_rho(spec)
    for value in (rho, rho_ref):
        if abs(abs(value) - rh) < 1e-12:
            raise DomainError("quadrature endpoint sits on the horizon")
    if (abs(rho) > rh) != (abs(rho_ref) > rh) or (rho * rho_ref < 0 and abs(rho) > rh):
        raise DomainError("rho and rho_ref must lie in the same region")
    val, _ = integrate.quad(lambda s: float(schwarzschild_time_rate(spec, s)), rho_ref, rho,
                            epsabs=1e-13, epsrel=1e-12, limit=200)
    return float(tau - spec.beta_s * val)


def schwarzschild_pullback(spec: SolitonSpec, rho, tau_rate_h=None):
    """Schwarzschild line element expressed in (tau, rho) coordinates.

    Returns the components (g_tautau, g_taurho, g_rhorho) obtained from
    dT = dtau - beta h drho and dr = r'(rho) drho, with h taken from
    ``tau_rate_h`` if given (e.g. differentiated quadrature) or the closed form.
    """
    rho = np.asarray(rho, float)
    b = spec.beta_s
    r, f, _ = to_schwarzschild(spec, rho)
    h = schwarzschild_time_rate(spec, rho) if tau_rate_h is None else np.asarray(tau_rate_h, float)
    dr = -np.tanh(rho) / (spec.gamma * np.cosh(rho))
    g_tt = f
    g_tr = -b * h * f
    g_rr = f * b * b * h * h - dr * dr / f
    return g_tt, g_tr, g_rr


def soliton_metric_tau_rho(spec: SolitonSpec, rho):
    """Soliton metric after xi = rho / gamma + beta_s tau, components in (tau, rho)."""
    rho = np.asarray(rho, float)
    b, g = spec.beta_s, spec.gamma
    s2 = 1.0 / np.cosh(rho) ** 2
    t2 = np.tanh(rho) ** 2
    return -s2 + b * b * t2, b * t2 / g, t2 / (g * g)


def tortoise(r, beta_s: float):
    """r* = (1 / 2 beta_s) ln((beta_s + r) / (beta_s - r)) for 0 <= r < beta_s."""
    r = np.asarray(r, float)
    if np.any(r < 0.0) or np.any(r >= beta_s):
        raise DomainError("tortoise coordinate needs 0 <= r < beta_s")
    return np.arctanh(r / beta_s) / beta_s


def radius_from_tortoise(r_star, beta_s: float):
    """Inverse of :func:`tortoise`: r = beta_s tanh(beta_s r*)."""
    return beta_s * np.tanh(beta_s * np.asarray(r_star, float))


@dataclass
class KruskalPoint:
    u: np.ndarray
    v: np.ndarray
    saturated: np.ndarray


def kruskal(T, r_star, beta_s: float) -> KruskalPoint:
    """u = exp(beta_s (T - r*)) / beta_s, v = exp(-beta_s (T + r*)) / beta_s.

    Points with beta_s |u~| or beta_s |v~| above 700 are flagged as
    saturated and their coordinates set to inf / 0 instead of overflowing.
    """
    T = np.asarray(T, float)
    r_star = np.asarray(r_star, float)
    ut = T - r_star
    vt = T + r_star
    arg_u = beta_s * ut
    arg_v = -beta_s * vt
    saturated = (np.abs(arg_u) > KRUSKAL_OVERFLOW) | (np.abs(arg_v) > KRUSKAL_OVERFLOW)
    with np.errstate(over="ignore"):
        u = np.exp(np.clip(arg_u, -np.inf, KRUSKAL_OVERFLOW + 10)) / beta_s
        v = np.exp(np.clip(arg_v, -np.inf, KRUSKAL_OVERFLOW + 10)) / beta_s
    u = np.where(arg_u > KRUSKAL_OVERFLOW, np.inf, u)
    v = np.where(arg_v > KRUSKAL_OVERFLOW, np.inf, v)
    return KruskalPoint(u, v, saturated)


def kruskal_radius(u, v, beta_s: float):
    """r from Kruskal coordinates: r* = -ln(beta_s^2 u v) / (2 beta_s)."""
    r_star = -np.log(beta_s * beta_s * np.asarray(u) * np.asarray(v)) / (2.0 * beta_s)
    return radius_from_tortoise(r_star, beta_s)


#: overall sign relating the printed null form [beta + r]^2 du dv to the
#: tortoise form; fixed by :func:`kruskal_pullback` (du dv < 0 for v decreasing in v~)
KRUSKAL_SIGN = -1.0


def kruskal_conformal_factor(r, beta_s: float):
    """Signed factor F in ds^2 = F du dv, i.e. KRUSKAL_SIGN (beta_s + r)^2."""
    return KRUSKAL_SIGN * (beta_s + np.asarray(r, float)) ** 2


@dataclass
class PullbackReport:
    """Kruskal metric pulled back to (T, r*) versus the tortoise form."""

    T: np.ndarray
    r_star: np.ndarray
    pulled: np.ndarray  # (n, 3): g_TT, g_Tr*, g_r*r* from the Kruskal side
    tortoise_form: np.ndarray  # (n, 3) from (beta^2 - r^2)(dT^2 - dr*^2)
    printed_sign_ratio: np.ndarray  # pulled(printed, +[beta+r]^2) / tortoise, per point
    max_rel_error: float

    @property
    def printed_convention_sign(self) -> float:
        return float(np.median(self.printed_sign_ratio))


def kruskal_pullback(T, r_star, beta_s: float, step: float = 1e-5) -> PullbackReport:
    """Pull ds^2 = F(r) du dv back through the numerical Jacobian of (T, r*) -> (u, v).

    The Jacobian uses 4th-order central differences in T and r*.  Also
    reports the ratio obtained with the unsigned factor +(beta + r)^2, which
    exposes the sign convention of the null form.
    """
    T = np.atleast_1d(np.asarray(T, float))
    r_star = np.atleast_1d(np.asarray(r_star, float))

    def jac(fn_index):
        out = []
        for shift_T, shift_R in ((1.0, 0.0), (0.0, 1.0)):
            vals = []
            for k in (-2, -1, 1, 2):
                p = kruskal(T + k * step * shift_T, r_star + k * step * shift_R, beta_s)
                vals.append(p.u if fn_index == 0 else p.v)
            out.append((vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * step))
        return out  # d/dT, d/dr*

    du_dT, du_dR = jac(0)
    dv_dT, dv_dR = jac(1)
    r = radius_from_tortoise(r_star, beta_s)
    unsigned = (beta_s + r) ** 2

    def pulled_with(factor):
        # F du dv as a symmetric product: g_ab = F (du_a dv_b + du_b dv_a) / 2
        g_TT = factor * du_dT * dv_dT
        g_TR = 0.5 * factor * (du_dT * dv_dR + du_dR * dv_dT)
        g_RR = factor * du_dR * dv_dR
        return np.stack([g_TT, g_TR, g_RR], axis=-1)

    f = beta_s**2 - r * r
    target = np.stack([f, np.zeros_like(f), -f], axis=-1)
    pulled = pulled_with(KRUSKAL_SIGN * unsigned)
    scale = np.abs(f)[:, None]
    rel = np.max(np.abs(pulled - target) / scale)
    printed = pulled_with(unsigned)
    ratio = printed[:, 0] / target[:, 0]
    return PullbackReport(T, r_star, pulled, target, ratio, float(rel))
