"""SSP Runge-Kutta drivers and Courant-based step control.

Each stage of the schemes used here is a convex combination

    y_stage = c_old * y_n + c_prev * (y_prev + dt * N(y_prev))

of the step's initial value and one forward-Euler substep, which is what
lets a monotone substep operator carry its properties through the full
step. A stage advances the solution by an effective alpha * dt, with alpha
the stage's forward-Euler advancement factor; the filter threshold in
absolute mode scales with that.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dg import DGOperator, Discretization, NodalField
from .errors import StateError
from .filtering import FilterConfig, apply_filter
from .fv import (CellAverageField, FVOperator, SubcellFVOperator,
                 broadcast_to_nodes, project_to_averages)


@dataclass(frozen=True)
class StageScheme:
    """SSP tableau as per-stage (c_old, c_prev, c_euler) combinations."""

    order: int
    coeffs: tuple[tuple[float, float, float], ...]
    alphas: tuple[float, ...]
    eval_offsets: tuple[float, ...]

    def __post_init__(self):
        for c_old, c_prev, c_euler in self.coeffs:
            if c_old < 0 or c_prev < 0 or c_euler < 0:
                raise ValueError("SSP coefficients must be nonnegative")
            if abs(c_old + c_prev - 1.0) > 1e-14:
                raise ValueError("stage weights must sum to one")
            if abs(c_euler - c_prev) > 1e-14:
                raise ValueError("forward-Euler coefficient must match c_prev")

    @property
    def n_stages(self) -> int:
        return len(self.coeffs)


def ssp2() -> StageScheme:
    return StageScheme(
        order=2,
        coeffs=((0.0, 1.0, 1.0), (0.5, 0.5, 0.5)),
        alphas=(1.0, 0.5),
        eval_offsets=(0.0, 1.0),
    )


def ssp3() -> StageScheme:
    return StageScheme(
        order=3,
        coeffs=((0.0, 1.0, 1.0), (0.75, 0.25, 0.25), (1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0)),
        alphas=(1.0, 0.25, 2.0 / 3.0),
        eval_offsets=(0.0, 1.0, 0.5),
    )


def scheme_for_degree(k: int) -> StageScheme:
    """Default pairing: degree 1 with the 2nd-order scheme, higher with 3rd."""
    return ssp2() if k <= 1 else ssp3()


def ssp_stage(scheme: StageScheme, stage: int, y_n, y_prev, dt: float, substep, t: float = 0.0):
    """One stage applied to arrays (or scalars): convex combination of y_n
    with the forward-Euler substep of y_prev.

    ``substep(y, t_stage, dt)`` must return y + dt N(y).
    """
    c_old, c_prev, _ = scheme.coeffs[stage]
    t_stage = t + scheme.eval_offsets[stage] * dt
    euler = substep(y_prev, t_stage, dt)
    return c_old * y_n + c_prev * euler


# ----------------------------------------------------------------------
@dataclass
class StepController:
    """Step-size selection: fixed dt, or fixed Courant number.

    The Courant number is k U dt / H for advection and k (U + c) dt / H for
    Euler, with H the minimum cell diameter and U the largest nodal signal
    magnitude. The final step is clipped to land exactly on t_final (and on
    any intermediate event time passed by the caller).
    """

    mode: str = "courant"
    courant: float = 0.1
    dt_fixed: float | None = None
    t_final: float = 1.0

    def __post_init__(self):
        if self.mode not in ("courant", "fixed"):
            raise ValueError(f"unknown step mode {self.mode!r}")
        if self.mode == "fixed" and (self.dt_fixed is None or self.dt_fixed <= 0):
            raise ValueError("fixed mode needs dt_fixed > 0")
        if self.mode == "courant" and not self.courant > 0:
            raise ValueError("courant target must be positive")

    def next_dt(self, field: NodalField, model, t: float, events=()) -> float:
        if self.mode == "fixed":
            dt = self.dt_fixed
        else:
            dt = compute_dt(self, field, model, field.disc.degree, field.disc.mesh, t)
        limit = self.t_final
        for e in events:
            if e > t + 1e-12 * max(1.0, self.t_final):
                limit = min(limit, e)
        return min(dt, limit - t)


def compute_dt(controller: StepController, field: NodalField, model, k: int, mesh,
               t: float = 0.0) -> float:
    """dt = C * H / (k * max nodal signal speed) for the Courant target C."""
    if controller.mode != "courant":
        raise ValueError("compute_dt applies to Courant-controlled stepping")
    if k < 1:
        raise ValueError("Courant formula needs polynomial degree >= 1")
    disc = field.disc
    speed = float(np.max(model.node_speed(field.data, disc.node_x, disc.node_y, t)))
    if speed <= 0.0:
        raise StateError("degenerate dynamics: maximum signal speed is zero", time=t)
    h_min = float(mesh.diam.min())
    return controller.courant * h_min / (k * speed)


# ----------------------------------------------------------------------
class FilteredStepper:
    """Composes the high-order and low-order stage operators with the filter.

    After every stage the high-order result is blended toward the low-order
    one; the blended state feeds the next stage. With no filter configured
    (or mode "high_order") the step is the plain SSP-RK DG step; mode
    "low_order" evolves cell averages only and broadcasts them back.
    """

    def __init__(self, disc: Discretization, model, bcs, scheme: StageScheme,
                 filter_config: FilterConfig | None = None, mode: str = "filtered",
                 low_order_op: str = "subcell"):
        if mode not in ("filtered", "high_order", "low_order"):
            raise ValueError(f"unknown stepper mode {mode!r}")
        if low_order_op not in ("subcell", "cell"):
            raise ValueError(f"unknown low-order operator {low_order_op!r}")
        if mode == "filtered" and filter_config is None:
            mode = "high_order"
        self.disc = disc
        self.model = model
        self.bcs = bcs
        self.scheme = scheme
        self.filter_config = filter_config
        self.mode = mode
        self.low_order_op = low_order_op
        self.high = DGOperator(disc, model, bcs)
        self.low = FVOperator(disc.mesh, model, bcs)
        self.low_subcell = SubcellFVOperator(disc, model, bcs) if low_order_op == "subcell" else None

    def rebind(self, disc: Discretization) -> "FilteredStepper":
        """Fresh stepper on a new discretization (after mesh adaptation)."""
        return FilteredStepper(disc, self.model, self.bcs, self.scheme,
                               self.filter_config, self.mode, self.low_order_op)

    def _high_euler_substep(self, y: np.ndarray, ts: float, h: float) -> np.ndarray:
        self.model.validate(y, ts, cell_of=lambda i: i[0])
        return y + h * self.high.residual(y, ts)

    # -- pure high-order -------------------------------------------------
    def _step_high(self, field: NodalField, t: float, dt: float) -> NodalField:
        v_n = field.data
        v = v_n
        for s in range(self.scheme.n_stages):
            v = ssp_stage(self.scheme, s, v_n, v, dt, self._high_euler_substep, t)
        return field.with_data(v)

    # -- pure low-order ----------------------------------------------------
    def _step_low(self, field: NodalField, t: float, dt: float) -> NodalField:
        a_n = project_to_averages(field).data
        a = a_n
        for s in range(self.scheme.n_stages):
            a = ssp_stage(self.scheme, s, a_n, a, dt, self.low.substep_data, t)
        avg = CellAverageField(self.disc, a, field.names)
        return broadcast_to_nodes(avg)

    # -- filtered ----------------------------------------------------------
    def _step_filtered(self, field: NodalField, t: float, dt: float) -> NodalField:
        scheme = self.scheme
        v_n = field.data
        a_n = np.einsum("vcij,ij->vc", v_n, self.disc.w2) * 0.25
        v = field
        for s in range(scheme.n_stages):
            c_old, c_prev, _ = scheme.coeffs[s]
            ts = t + scheme.eval_offsets[s] * dt
            self.model.validate(v.data, ts, cell_of=lambda i: i[0])
            u_high = v.with_data(
                c_old * v_n + c_prev * (v.data + dt * self.high.residual(v.data, ts))
            )
            if self.low_subcell is not None:
                low_stage = c_old * v_n + c_prev * self.low_subcell.substep_data(v.data, ts, dt)
                u_low = v.with_data(low_stage)
            else:
                a_prev = np.einsum("vcij,ij->vc", v.data, self.disc.w2) * 0.25
                a_stage = c_old * a_n + c_prev * self.low.substep_data(a_prev, ts, dt)
                u_low = broadcast_to_nodes(CellAverageField(self.disc, a_stage, field.names))
            # the increment gauge measures the stage against the no-evolution
            # combination, so |u_low - ref| is the pure monotone update
            ref = v.with_data(c_old * v_n + c_prev * v.data)
            v = apply_filter(u_high, u_low, scheme.alphas[s] * dt,
                             self.filter_config, reference=ref)
        return v

    def step(self, field: NodalField, t: float, dt: float) -> NodalField:
        if field.disc is not self.disc:
            raise RuntimeError("field and stepper live on different discretizations")
        if self.mode == "high_order":
            return self._step_high(field, t, dt)
        if self.mode == "low_order":
            return self._step_low(field, t, dt)
        return self._step_filtered(field, t, dt)
