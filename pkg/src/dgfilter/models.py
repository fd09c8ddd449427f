"""PDE models: linear advection with a prescribed velocity field, and the
compressible Euler equations with an ideal-gas law.

Conserved variables are stacked along the leading array axis, so model
methods accept and return arrays of shape (n_vars, ...). The Euler ordering
is (rho, mom_x, mom_y, energy).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, StateError


@dataclass(frozen=True)
class IdealGasEos:
    """Ideal gas with constant specific-heats ratio."""

    gamma: float = 1.4

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"specific heats ratio must exceed 1, got {self.gamma}")


@dataclass
class EulerState:
    """Point value of the conserved Euler variables (2D)."""

    rho: float
    mom_x: float
    mom_y: float
    energy: float

    def as_array(self) -> np.ndarray:
        return np.array([self.rho, self.mom_x, self.mom_y, self.energy])


def _as_state_array(state) -> np.ndarray:
    if isinstance(state, EulerState):
        return state.as_array()
    return np.asarray(state, dtype=float)


def pressure(state, eos: IdealGasEos, *, check: bool = True):
    """Ideal-gas pressure p = (gamma - 1)(E - |m|^2 / (2 rho)).

    Raises :class:`StateError` on non-positive density or pressure unless
    ``check`` is disabled.
    """
    w = _as_state_array(state)
    rho = w[0]
    kin = 0.5 * (w[1] * w[1] + w[2] * w[2]) / rho
    p = (eos.gamma - 1.0) * (w[3] - kin)
    if check:
        bad = ~((rho > 0.0) & (p > 0.0))
        if np.any(bad):
            idx = np.argwhere(np.atleast_1d(bad))[0]
            r = np.atleast_1d(rho)[tuple(idx)]
            q = np.atleast_1d(p)[tuple(idx)]
            raise StateError(f"negative pressure or density (rho={r:.6g}, p={q:.6g})")
    return p


def euler_flux(state, eos: IdealGasEos):
    """Flux columns (F_x, F_y) of the 2D Euler system, each shaped like the state."""
    w = _as_state_array(state)
    p = pressure(w, eos)
    u = w[1] / w[0]
    v = w[2] / w[0]
    fx = np.stack([w[1], w[1] * u + p, w[2] * u, (w[3] + p) * u])
    fy = np.stack([w[2], w[1] * v, w[2] * v + p, (w[3] + p) * v])
    return fx, fy


def max_wave_speed(state, eos: IdealGasEos, direction):
    """|u . n| + c for a unit direction n."""
    w = _as_state_array(state)
    nx, ny = direction
    p = pressure(w, eos)
    c = np.sqrt(eos.gamma * p / w[0])
    un = (w[1] * nx + w[2] * ny) / w[0]
    return np.abs(un) + c


def primitive_to_conserved(rho, u, v, p, eos: IdealGasEos) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    energy = p / (eos.gamma - 1.0) + 0.5 * rho * (u * u + v * v)
    return np.stack(np.broadcast_arrays(rho, rho * u, rho * v, energy))


def conserved_to_primitive(w, eos: IdealGasEos):
    """(rho, u, v, p) from a conserved array; no admissibility check."""
    rho = w[0]
    u = w[1] / rho
    v = w[2] / rho
    p = (eos.gamma - 1.0) * (w[3] - 0.5 * rho * (u * u + v * v))
    return rho, u, v, p


# ----------------------------------------------------------------------
class AdvectionModel:
    """Scalar transport u_t + div(a(x, t) u) = 0 for a prescribed velocity."""

    n_vars = 1
    names = ("u",)

    def __init__(self, velocity):
        self.velocity = velocity  # velocity(x, y, t) -> (ax, ay)

    def flux(self, w, x, y, t):
        ax, ay = self.velocity(x, y, t)
        return ax * w, ay * w

    def flux_axis(self, w, x, y, t, axis):
        a = self.velocity(x, y, t)[axis]
        return a * w

    def face_speed(self, w_l, w_r, x, y, t, axis):
        a = self.velocity(x, y, t)[axis]
        return np.abs(a)

    def node_speed(self, w, x, y, t):
        ax, ay = self.velocity(x, y, t)
        return np.hypot(ax, ay) * np.ones_like(w[0])

    def validate(self, w, t, cell_of=None):
        if not np.all(np.isfinite(w)):
            cell = _first_bad_cell(~np.isfinite(w).all(axis=0), cell_of)
            raise StateError("non-finite scalar state", cell=cell, time=t)


class EulerModel:
    """Compressible Euler equations closed by an ideal-gas law."""

    n_vars = 4
    names = ("rho", "mom_x", "mom_y", "energy")

    def __init__(self, eos: IdealGasEos | None = None):
        self.eos = eos or IdealGasEos()

    def flux(self, w, x, y, t):
        return euler_flux(w, self.eos)

    def flux_axis(self, w, x, y, t, axis):
        p = pressure(w, self.eos)
        vel = w[1 + axis] / w[0]
        f = np.stack([
            w[1 + axis],
            w[1] * vel,
            w[2] * vel,
            (w[3] + p) * vel,
        ])
        f[1 + axis] += p
        return f

    def face_speed(self, w_l, w_r, x, y, t, axis):
        n = (1.0, 0.0) if axis == 0 else (0.0, 1.0)
        return np.maximum(
            max_wave_speed(w_l, self.eos, n), max_wave_speed(w_r, self.eos, n)
        )

    def node_speed(self, w, x, y, t):
        p = pressure(w, self.eos)
        c = np.sqrt(self.eos.gamma * p / w[0])
        return np.hypot(w[1], w[2]) / w[0] + c

    def validate(self, w, t, cell_of=None):
        p = pressure(w, self.eos, check=False)
        bad = ~((w[0] > 0.0) & (p > 0.0) & np.isfinite(p))
        if np.any(bad):
            cell = _first_bad_cell(bad, cell_of)
            i = np.unravel_index(np.argmax(bad), bad.shape)
            raise StateError(
                f"non-physical Euler state (rho={w[0][i]:.6g}, p={p[i]:.6g})"
                + (f" in cell {cell}" if cell is not None else "")
                + f" at t={t:.6g}",
                cell=cell,
                time=t,
            )


def _first_bad_cell(bad, cell_of):
    """Map the first flagged entry to a cell index when the layout allows it."""
    if cell_of is None:
        return None
    i = np.unravel_index(np.argmax(bad), bad.shape)
    return int(cell_of(i))


def solid_body_velocity(omega: float = 1.0):
    """Counterclockwise rigid rotation about the origin."""

    def velocity(x, y, t):
        return -omega * y, omega * x

    return velocity


# ----------------------------------------------------------------------
# Benchmark initial data
# ----------------------------------------------------------------------
SOD_LEFT = (1.0, 0.0, 1.0)       # rho, u, p
SOD_RIGHT = (0.125, 0.0, 0.1)
EXPLOSION_INNER = (1.0, 0.0, 0.0, 1.0)    # rho, u, v, p
EXPLOSION_OUTER = (0.125, 0.0, 0.0, 1.0)
VORTEX_STRENGTH = 5.0
# zero free stream: the swirl is an exact steady solution, trivially periodic
# in time, and the coarse meshes resolve it far better than a translating one
VORTEX_FREESTREAM = (0.0, 0.0)


def solid_body_rotation_ic(x, y):
    """Off-center indicator disc: 1 inside the circle, 0 outside."""
    xs = (np.asarray(x, dtype=float) - 1.0 / 6.0) / 0.2
    ys = (np.asarray(y, dtype=float) - 1.0 / 6.0) / 0.2
    return np.where(xs * xs + ys * ys <= 1.0, 1.0, 0.0)[None]


def isentropic_vortex_state(x, y, eos: IdealGasEos, *, strength: float = VORTEX_STRENGTH,
                            center=(0.0, 0.0), freestream=VORTEX_FREESTREAM) -> np.ndarray:
    """Isentropic vortex carried by a uniform free stream.

    Temperature perturbation dT = (1 - gamma)/(8 gamma pi^2) b^2 exp(1 - r^2)
    with density (1 + dT)^(1/(gamma-1)), pressure (1 + dT)^(gamma/(gamma-1))
    and a swirl velocity b exp((1 - r^2)/2) / (2 pi) around the center, added
    to the free-stream velocity. The exact solution is this profile advected
    with the free stream.
    """
    dx = np.asarray(x, dtype=float) - center[0]
    dy = np.asarray(y, dtype=float) - center[1]
    r2 = dx * dx + dy * dy
    g = eos.gamma
    dt_ = (1.0 - g) / (8.0 * g * np.pi ** 2) * strength ** 2 * np.exp(1.0 - r2)
    rho = (1.0 + dt_) ** (1.0 / (g - 1.0))
    p = (1.0 + dt_) ** (g / (g - 1.0))
    swirl = strength * np.exp(0.5 * (1.0 - r2)) / (2.0 * np.pi)
    u = freestream[0] - dy * swirl
    v = freestream[1] + dx * swirl
    return primitive_to_conserved(rho, u, v, p, eos)


def sod_ic(x, y, eos: IdealGasEos) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    rho = np.where(x < 0.0, SOD_LEFT[0], SOD_RIGHT[0])
    p = np.where(x < 0.0, SOD_LEFT[2], SOD_RIGHT[2])
    zero = np.zeros_like(rho)
    return primitive_to_conserved(rho, zero, zero, p, eos)


def explosion_ic(x, y, eos: IdealGasEos, *, radius: float = 0.5) -> np.ndarray:
    r = np.hypot(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    inner = r <= radius
    rho = np.where(inner, EXPLOSION_INNER[0], EXPLOSION_OUTER[0])
    p = np.where(inner, EXPLOSION_INNER[3], EXPLOSION_OUTER[3])
    zero = np.zeros_like(rho)
    return primitive_to_conserved(rho, zero, zero, p, eos)


# quadrant states (rho, u, v, p), counterclockwise from the upper-right
RIEMANN2D_STATES = (
    (1.1, 0.0, 0.0, 1.0),
    (0.5065, 0.8939, 0.0, 0.35),
    (1.1, 0.8939, 0.8939, 1.1),
    (0.5065, 0.0, 0.8939, 0.35),
)


def riemann2d_ic(x, y, eos: IdealGasEos, *, split=(0.5, 0.5)) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    right = x > split[0]
    top = y > split[1]
    quad = np.where(right & top, 0, np.where(~right & top, 1, np.where(~right & ~top, 2, 3)))
    states = np.array(RIEMANN2D_STATES)
    rho = states[quad, 0]
    u = states[quad, 1]
    v = states[quad, 2]
    p = states[quad, 3]
    return primitive_to_conserved(rho, u, v, p, eos)


BENCHMARK_NAMES = ("solid_body_rotation", "isentropic_vortex", "sod", "explosion", "riemann2d")


def initial_condition(benchmark: str, x, y, eos: IdealGasEos | None = None) -> np.ndarray:
    """Pointwise initial state of a named benchmark, shaped (n_vars, ...)."""
    eos = eos or IdealGasEos()
    if benchmark == "solid_body_rotation":
        return solid_body_rotation_ic(x, y)
    if benchmark == "isentropic_vortex":
        return isentropic_vortex_state(x, y, eos)
    if benchmark == "sod":
        return sod_ic(x, y, eos)
    if benchmark == "explosion":
        return explosion_ic(x, y, eos)
    if benchmark == "riemann2d":
        return riemann2d_ic(x, y, eos)
    raise ConfigError(f"run.benchmark: unknown benchmark {benchmark!r}")
