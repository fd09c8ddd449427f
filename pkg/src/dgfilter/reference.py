"""Reference solutions and error reporting.

Contains the exact Riemann solver used for the shock-tube comparison, the
closed-form stationary vortex, a high-resolution 1D finite-volume solve of
the radially symmetric Euler equations (for the cylindrical explosion), and
quadrature-weighted error norms plus convergence rates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dg import NodalField
from .errors import StateError
from .models import IdealGasEos, conserved_to_primitive, isentropic_vortex_state

_NEWTON_TOL = 1e-12
_NEWTON_MAX_ITER = 100


# ----------------------------------------------------------------------
# Exact Riemann solver (1D Euler)
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class RiemannStarState:
    p_star: float
    u_star: float
    rho_star_left: float
    rho_star_right: float
    left_wave: str   # "shock" | "rarefaction"
    right_wave: str
    residual: float  # pressure-function residual at the root


def _pressure_fn(p, rho_k, p_k, c_k, g):
    """f_K(p) and its derivative for one side of the Riemann problem."""
    if p > p_k:  # shock
        a = 2.0 / ((g + 1.0) * rho_k)
        b = (g - 1.0) / (g + 1.0) * p_k
        root = np.sqrt(a / (p + b))
        f = (p - p_k) * root
        df = root * (1.0 - 0.5 * (p - p_k) / (p + b))
    else:  # rarefaction
        f = 2.0 * c_k / (g - 1.0) * ((p / p_k) ** ((g - 1.0) / (2.0 * g)) - 1.0)
        df = (p / p_k) ** (-(g + 1.0) / (2.0 * g)) / (rho_k * c_k)
    return f, df


def riemann_star_state(left, right, eos: IdealGasEos | None = None) -> RiemannStarState:
    """Star-region pressure/velocity/densities between the two nonlinear waves.

    ``left`` and ``right`` are (rho, u, p) triples. Uses Newton iteration on
    the exact pressure function, seeded by the two-rarefaction estimate.
    """
    eos = eos or IdealGasEos()
    g = eos.gamma
    rho_l, u_l, p_l = (float(v) for v in left)
    rho_r, u_r, p_r = (float(v) for v in right)
    if rho_l <= 0 or rho_r <= 0 or p_l <= 0 or p_r <= 0:
        raise StateError("Riemann solver needs positive density and pressure")
    c_l = np.sqrt(g * p_l / rho_l)
    c_r = np.sqrt(g * p_r / rho_r)
    du = u_r - u_l
    if 2.0 * (c_l + c_r) / (g - 1.0) <= du:
        raise StateError("vacuum generation: Riemann problem has no positive-pressure solution")

    z = (g - 1.0) / (2.0 * g)
    p = ((c_l + c_r - 0.5 * (g - 1.0) * du) / (c_l / p_l ** z + c_r / p_r ** z)) ** (1.0 / z)
    p = max(p, 1e-10 * min(p_l, p_r))
    for _ in range(_NEWTON_MAX_ITER):
        f_l, df_l = _pressure_fn(p, rho_l, p_l, c_l, g)
        f_r, df_r = _pressure_fn(p, rho_r, p_r, c_r, g)
        f = f_l + f_r + du
        step = f / (df_l + df_r)
        p_new = max(p - step, 1e-12 * min(p_l, p_r))
        done = abs(p_new - p) < _NEWTON_TOL * max(p_new, 1.0)
        p = p_new
        if done:
            break
    else:
        raise StateError("Riemann pressure iteration did not converge")

    f_l, _ = _pressure_fn(p, rho_l, p_l, c_l, g)
    f_r, _ = _pressure_fn(p, rho_r, p_r, c_r, g)
    u = 0.5 * (u_l + u_r) + 0.5 * (f_r - f_l)
    gm = (g - 1.0) / (g + 1.0)
    if p > p_l:
        rho_sl = rho_l * ((p / p_l + gm) / (gm * p / p_l + 1.0))
        lw = "shock"
    else:
        rho_sl = rho_l * (p / p_l) ** (1.0 / g)
        lw = "rarefaction"
    if p > p_r:
        rho_sr = rho_r * ((p / p_r + gm) / (gm * p / p_r + 1.0))
        rw = "shock"
    else:
        rho_sr = rho_r * (p / p_r) ** (1.0 / g)
        rw = "rarefaction"
    return RiemannStarState(p, u, rho_sl, rho_sr, lw, rw, abs(f_l + f_r + du))


def sample_riemann(star: RiemannStarState, left, right, xi, eos: IdealGasEos | None = None):
    """Self-similar solution at speeds xi = x/t; returns (rho, u, p) arrays."""
    eos = eos or IdealGasEos()
    g = eos.gamma
    rho_l, u_l, p_l = (float(v) for v in left)
    rho_r, u_r, p_r = (float(v) for v in right)
    c_l = np.sqrt(g * p_l / rho_l)
    c_r = np.sqrt(g * p_r / rho_r)
    xi = np.asarray(xi, dtype=float)
    rho = np.empty_like(xi)
    u = np.empty_like(xi)
    p = np.empty_like(xi)

    ls = xi < star.u_star  # left of the contact
    # left side
    if star.left_wave == "shock":
        s = u_l - c_l * np.sqrt((g + 1.0) / (2.0 * g) * star.p_star / p_l + (g - 1.0) / (2.0 * g))
        ahead = ls & (xi < s)
        behind = ls & ~ahead
        rho[ahead], u[ahead], p[ahead] = rho_l, u_l, p_l
        rho[behind], u[behind], p[behind] = star.rho_star_left, star.u_star, star.p_star
    else:
        c_sl = c_l * (star.p_star / p_l) ** ((g - 1.0) / (2.0 * g))
        head = u_l - c_l
        tail = star.u_star - c_sl
        ahead = ls & (xi < head)
        fan = ls & (xi >= head) & (xi < tail)
        behind = ls & (xi >= tail)
        rho[ahead], u[ahead], p[ahead] = rho_l, u_l, p_l
        u[fan] = 2.0 / (g + 1.0) * (c_l + 0.5 * (g - 1.0) * u_l + xi[fan])
        c_fan = c_l - 0.5 * (g - 1.0) * (u[fan] - u_l)
        rho[fan] = rho_l * (c_fan / c_l) ** (2.0 / (g - 1.0))
        p[fan] = p_l * (c_fan / c_l) ** (2.0 * g / (g - 1.0))
        rho[behind], u[behind], p[behind] = star.rho_star_left, star.u_star, star.p_star

    rs = ~ls
    if star.right_wave == "shock":
        s = u_r + c_r * np.sqrt((g + 1.0) / (2.0 * g) * star.p_star / p_r + (g - 1.0) / (2.0 * g))
        ahead = rs & (xi > s)
        behind = rs & ~ahead
        rho[ahead], u[ahead], p[ahead] = rho_r, u_r, p_r
        rho[behind], u[behind], p[behind] = star.rho_star_right, star.u_star, star.p_star
    else:
        c_sr = c_r * (star.p_star / p_r) ** ((g - 1.0) / (2.0 * g))
        head = u_r + c_r
        tail = star.u_star + c_sr
        ahead = rs & (xi > head)
        fan = rs & (xi <= head) & (xi > tail)
        behind = rs & (xi <= tail)
        rho[ahead], u[ahead], p[ahead] = rho_r, u_r, p_r
        u[fan] = 2.0 / (g + 1.0) * (-c_r + 0.5 * (g - 1.0) * u_r + xi[fan])
        c_fan = c_r + 0.5 * (g - 1.0) * (u[fan] - u_r)
        rho[fan] = rho_r * (c_fan / c_r) ** (2.0 / (g - 1.0))
        p[fan] = p_r * (c_fan / c_r) ** (2.0 * g / (g - 1.0))
        rho[behind], u[behind], p[behind] = star.rho_star_right, star.u_star, star.p_star

    return rho, u, p


SOD_LEFT_PRIM = (1.0, 0.0, 1.0)
SOD_RIGHT_PRIM = (0.125, 0.0, 0.1)


def sod_exact(x, t, eos: IdealGasEos | None = None, x0: float = 0.0):
    """Exact shock-tube solution at time t > 0: (rho, u, p) arrays."""
    if t <= 0:
        raise ValueError("shock-tube sampling needs t > 0")
    eos = eos or IdealGasEos()
    star = riemann_star_state(SOD_LEFT_PRIM, SOD_RIGHT_PRIM, eos)
    xi = (np.asarray(x, dtype=float) - x0) / t
    return sample_riemann(star, SOD_LEFT_PRIM, SOD_RIGHT_PRIM, xi, eos)


# ----------------------------------------------------------------------
# Stationary vortex
# ----------------------------------------------------------------------
def vortex_exact(x, y, t, eos: IdealGasEos | None = None, *, strength: float = 5.0,
                 center=(0.0, 0.0), domain=(-5.0, 5.0, -5.0, 5.0),
                 freestream=None) -> np.ndarray:
    """Conserved vortex state at any time: the initial profile advected by
    the free stream, wrapped into the periodic box."""
    from .models import VORTEX_FREESTREAM

    eos = eos or IdealGasEos()
    if freestream is None:
        freestream = VORTEX_FREESTREAM
    x0, x1, y0, y1 = domain
    xs = np.asarray(x, dtype=float) - freestream[0] * t
    ys = np.asarray(y, dtype=float) - freestream[1] * t
    xw = np.mod(xs - x0, x1 - x0) + x0
    yw = np.mod(ys - y0, y1 - y0) + y0
    return isentropic_vortex_state(xw, yw, eos, strength=strength, center=center,
                                   freestream=freestream)


# ----------------------------------------------------------------------
# Radial explosion oracle
# ----------------------------------------------------------------------
@dataclass
class RadialReference:
    """Radial profiles (rho, u_r, p) recorded at fixed times.

    Built by a MUSCL-Hancock finite-volume solve of the 1D Euler equations
    in the radial coordinate with the cylindrical geometric source term.
    """

    t_final: float
    r_centers: np.ndarray
    snapshots: dict[float, np.ndarray] = field(default_factory=dict)  # (3, n) prim

    def sample(self, r, t: float):
        """(rho, u_r, p) linearly interpolated in radius at a recorded time."""
        key = None
        for rec in self.snapshots:
            if abs(rec - t) <= 1e-9 * max(1.0, self.t_final):
                key = rec
                break
        if key is None:
            raise ValueError(f"time {t} was not recorded; have {sorted(self.snapshots)}")
        r = np.asarray(r, dtype=float)
        dr = self.r_centers[1] - self.r_centers[0]
        hi = self.r_centers[-1] + 0.5 * dr
        if np.any(r < 0) or np.any(r > hi + 1e-9 * max(1.0, hi)):
            raise ValueError("radius outside the precomputed table")
        prim = self.snapshots[key]
        rho = np.interp(r, self.r_centers, prim[0])
        u = np.interp(r, self.r_centers, prim[1])
        p = np.interp(r, self.r_centers, prim[2])
        return rho, u, p


def _minmod(a, b):
    s = np.sign(a)
    return np.where(s * np.sign(b) > 0, s * np.minimum(np.abs(a), np.abs(b)), 0.0)


def _radial_flux(w, g):
    rho, m, e = w
    u = m / rho
    p = (g - 1.0) * (e - 0.5 * m * u)
    return np.stack([m, m * u + p, (e + p) * u])


def _radial_source(w, r, g):
    rho, m, e = w
    u = m / rho
    p = (g - 1.0) * (e - 0.5 * m * u)
    geom = -1.0 / r  # cylindrical symmetry (d = 2)
    return geom * np.stack([m, m * u, (e + p) * u])


def _radial_rusanov(wl, wr, g):
    ul = wl[1] / wl[0]
    ur = wr[1] / wr[0]
    pl = (g - 1.0) * (wl[2] - 0.5 * wl[1] * ul)
    pr = (g - 1.0) * (wr[2] - 0.5 * wr[1] * ur)
    lam = np.maximum(np.abs(ul) + np.sqrt(g * pl / wl[0]),
                     np.abs(ur) + np.sqrt(g * pr / wr[0]))
    return 0.5 * (_radial_flux(wl, g) + _radial_flux(wr, g)) - 0.5 * lam * (wr - wl)


def radial_explosion_reference(
    t_final: float = 0.2,
    n_cells: int = 10000,
    r_max: float = 1.2,
    *,
    radius: float = 0.5,
    inner=(1.0, 0.0, 1.0),
    outer=(0.125, 0.0, 1.0),
    eos: IdealGasEos | None = None,
    record_times=(0.0,),
    cfl: float = 0.45,
) -> RadialReference:
    """Solve the radial Euler system to t_final and record primitive profiles.

    Second-order MUSCL-Hancock with minmod slopes and a Rusanov flux; the
    geometric source is evaluated at the half-step midpoint state. Reflective
    at the axis, outflow at r_max.
    """
    eos = eos or IdealGasEos()
    g = eos.gamma
    h = r_max / n_cells
    r = (np.arange(n_cells) + 0.5) * h
    rho = np.where(r <= radius, inner[0], outer[0])
    u = np.where(r <= radius, inner[1], outer[1])
    p = np.where(r <= radius, inner[2], outer[2])
    w = np.stack([rho, rho * u, p / (g - 1.0) + 0.5 * rho * u * u])

    ref = RadialReference(t_final=t_final, r_centers=r)
    times = sorted(set(float(t) for t in record_times) | {t_final})

    def record(t):
        rr, uu, pp = w[0], w[1] / w[0], (g - 1.0) * (w[2] - 0.5 * w[1] ** 2 / w[0])
        ref.snapshots[t] = np.stack([rr, uu, pp]).copy()

    t = 0.0
    if times and abs(times[0]) < 1e-15:
        record(0.0)
        times = times[1:]
    next_events = times
    while t < t_final - 1e-15:
        c = np.sqrt(g * (g - 1.0) * (w[2] - 0.5 * w[1] ** 2 / w[0]) / w[0])
        dt = cfl * h / float(np.max(np.abs(w[1] / w[0]) + c))
        for e in next_events:
            if e > t + 1e-15:
                dt = min(dt, e - t)
                break

        # ghost cells: reflective at the axis, transmissive outside
        ext = np.concatenate([w[:, :1], w, w[:, -1:]], axis=1)
        ext[1, 0] = -ext[1, 0]
        slope = _minmod(ext[:, 1:-1] - ext[:, :-2], ext[:, 2:] - ext[:, 1:-1])
        w_minus = w - 0.5 * slope
        w_plus = w + 0.5 * slope
        dflux = _radial_flux(w_plus, g) - _radial_flux(w_minus, g)
        w_half_c = w - 0.5 * dt / h * dflux + 0.5 * dt * _radial_source(w, r, g)
        shift = w_half_c - w
        w_minus_h = w_minus + shift
        w_plus_h = w_plus + shift

        wl = np.concatenate([w_minus_h[:, :1], w_plus_h], axis=1)
        wl[1, 0] = -wl[1, 0]
        wr = np.concatenate([w_minus_h, w_plus_h[:, -1:]], axis=1)
        flux = _radial_rusanov(wl, wr, g)
        w = w - dt / h * (flux[:, 1:] - flux[:, :-1]) + dt * _radial_source(w_half_c, r, g)
        t += dt
        for e in list(next_events):
            if abs(t - e) < 1e-12:
                record(e)
                next_events = [q for q in next_events if q > e]
    if t_final not in ref.snapshots:
        record(t_final)
    return ref


# ----------------------------------------------------------------------
# Error reporting
# ----------------------------------------------------------------------
@dataclass
class ErrorReport:
    l1_rel: float
    l2_rel: float
    linf_rel: float
    max_value: float
    min_value: float
    mass_drift_rel: float = 0.0
    absolute_fallback: bool = False

    def as_dict(self) -> dict:
        return {
            "l1_rel": self.l1_rel,
            "l2_rel": self.l2_rel,
            "linf_rel": self.linf_rel,
            "max_value": self.max_value,
            "min_value": self.min_value,
            "mass_drift_rel": self.mass_drift_rel,
            "absolute_fallback": self.absolute_fallback,
        }


def error_norms(numeric: NodalField, exact) -> dict[str, ErrorReport]:
    """Quadrature-weighted relative L1/L2/Linf errors per variable.

    ``exact`` is either a sampler called as exact(x, y) returning an array
    shaped (n_vars, ...) aligned with the field's variables, or such an
    array directly. A variable whose exact norm vanishes gets absolute norms
    with the fallback flag set.
    """
    disc = numeric.disc
    if callable(exact):
        ex = np.asarray(exact(disc.node_x, disc.node_y), dtype=float)
    else:
        ex = np.asarray(exact, dtype=float)
    if ex.ndim == 3:
        ex = ex[None]
    qw = 0.25 * disc.mesh.area[:, None, None] * disc.w2[None, :, :]
    reports = {}
    for i, name in enumerate(numeric.names):
        diff = numeric.data[i] - ex[i]
        l1 = float(np.sum(qw * np.abs(diff)))
        l2 = float(np.sqrt(np.sum(qw * diff * diff)))
        linf = float(np.max(np.abs(diff)))
        n1 = float(np.sum(qw * np.abs(ex[i])))
        n2 = float(np.sqrt(np.sum(qw * ex[i] * ex[i])))
        ninf = float(np.max(np.abs(ex[i])))
        fallback = min(n1, n2, ninf) == 0.0
        if not fallback:
            l1, l2, linf = l1 / n1, l2 / n2, linf / ninf
        reports[name] = ErrorReport(
            l1_rel=l1, l2_rel=l2, linf_rel=linf,
            max_value=float(numeric.data[i].max()),
            min_value=float(numeric.data[i].min()),
            absolute_fallback=fallback,
        )
    return reports


def convergence_rate(errors, factors=2.0):
    """Observed orders log(e_{i-1}/e_i) / log(factor_i) between refinements."""
    errors = [float(e) for e in errors]
    if len(errors) < 2:
        raise ValueError("need at least two errors")
    if any(e <= 0 for e in errors):
        raise ValueError("errors must be positive")
    if np.isscalar(factors):
        factors = [float(factors)] * (len(errors) - 1)
    factors = [float(f) for f in factors]
    if len(factors) != len(errors) - 1:
        raise ValueError("need one mesh factor per refinement step")
    return [float(np.log(errors[i] / errors[i + 1]) / np.log(factors[i]))
            for i in range(len(errors) - 1)]


def radial_bins(field: NodalField, variable: str | None = None, n_bins: int = 400,
                r_max: float = 1.2, values: np.ndarray | None = None):
    """Bin nodal values of one variable (or a supplied nodal array) by radius.

    Returns (centers, mean, min, max, count); empty bins carry NaN stats.
    """
    disc = field.disc
    r = np.hypot(disc.node_x, disc.node_y).ravel()
    v = (values if values is not None else field.var(variable)).ravel()
    edges = np.linspace(0.0, r_max, n_bins + 1)
    idx = np.clip(np.digitize(r, edges) - 1, 0, n_bins - 1)
    inside = r <= r_max
    count = np.bincount(idx[inside], minlength=n_bins)
    s = np.bincount(idx[inside], weights=v[inside], minlength=n_bins)
    with np.errstate(invalid="ignore"):
        mean = np.where(count > 0, s / np.maximum(count, 1), np.nan)
    vmin = np.full(n_bins, np.inf)
    vmax = np.full(n_bins, -np.inf)
    np.minimum.at(vmin, idx[inside], v[inside])
    np.maximum.at(vmax, idx[inside], v[inside])
    vmin[count == 0] = np.nan
    vmax[count == 0] = np.nan
    centers = 0.5 * (edges[:-1] + edges[1:])
    return centers, mean, vmin, vmax, count
