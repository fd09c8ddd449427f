"""Nodewise blending of high-order and low-order stage results.

Given the two stage outputs uH and uM at the same nodes, the blended value is

    uF_i = uM_i + s_i * F((uH_i - uM_i) / s_i)

where F is an odd filter function that is the identity on [-1, 1] and has
compact support, and s_i is a per-node threshold. In absolute mode the
threshold is proportional to the cell size and the effective stage step; in
relative mode it is proportional to the magnitude of the low-order value
itself, so the classification is scale covariant.

Because F is the identity on [-1, 1], whenever |uH - uM| <= s the blend
passes the high-order value through unchanged; the implementation branches
on that comparison explicitly so pass-through and the F1 cut-off are exact
in floating point, not just up to the round-trip of s * (d / s).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .dg import NodalField


def filter_f1(x):
    """Sharp filter: identity on [-1, 1], zero outside."""
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) <= 1.0, x, 0.0)


def filter_f2(x):
    """Tent filter sign(x) max(1 - ||x| - 1|, 0): identity on [-1, 1],
    linear decay to zero on 1 < |x| < 2."""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.maximum(1.0 - np.abs(np.abs(x) - 1.0), 0.0)


_FUNCTIONS = {"f1": filter_f1, "f2": filter_f2}


@dataclass(frozen=True)
class FilterConfig:
    """Choice of filter function, thresholding mode and its parameters.

    Absolute mode thresholds at c0 * h_K * (alpha dt) per cell; relative mode
    at beta_v * |uM| per node and variable, with the denominator floored at
    ``denominator_floor`` times the variable's global max magnitude so nodes
    where the low-order value crosses zero stay well defined.

    ``gauge`` selects the relative-mode reference magnitude: "state" uses the
    low-order stage value itself, "increment" uses the distance the low-order
    stage moved from the stage input (which vanishes as dt -> 0, so the
    classification measures how far the high-order update strays from the
    monotone one in units of the monotone change).
    """

    function: str = "f1"
    mode: str = "relative"
    c0: float | None = None
    betas: Mapping[str, float] | None = None
    denominator_floor: float = 1e-8
    gauge: str = "state"
    gamma: float = 1.4  # used by the acoustic momentum gauge

    def __post_init__(self):
        if self.function not in _FUNCTIONS:
            raise ValueError(f"filter function must be one of {sorted(_FUNCTIONS)}")
        if self.mode == "absolute":
            if self.c0 is None or not self.c0 > 0:
                raise ValueError("absolute mode needs c0 > 0")
        elif self.mode == "relative":
            if not self.betas:
                raise ValueError("relative mode needs at least one beta")
            for name, b in self.betas.items():
                if not b > 0:
                    raise ValueError(f"beta for {name!r} must be positive, got {b}")
        else:
            raise ValueError(f"unknown filter mode {self.mode!r}")
        if not self.denominator_floor > 0:
            raise ValueError("denominator_floor must be positive")
        if self.gauge not in ("state", "increment"):
            raise ValueError(f"unknown relative gauge {self.gauge!r}")


def blend(u_high, u_low, threshold, function: str):
    """Array-level blend of two stage results with a positive threshold."""
    fn = _FUNCTIONS[function]
    diff = u_high - u_low
    passed = np.abs(diff) <= threshold
    if function == "f1":
        return np.where(passed, u_high, u_low)
    safe = np.where(threshold > 0, threshold, 1.0)
    return np.where(passed, u_high, u_low + threshold * fn(diff / safe))


def apply_absolute(u_high: NodalField, u_low: NodalField, alpha_dt: float,
                   cfg: FilterConfig) -> NodalField:
    """Blend with nodewise threshold c0 * h_K * alpha_dt (h_K = cell diameter)."""
    if cfg.mode != "absolute":
        raise ValueError("apply_absolute needs an absolute-mode config")
    if not alpha_dt > 0:
        raise ValueError(f"effective stage step must be positive, got {alpha_dt}")
    thr = (cfg.c0 * alpha_dt) * u_high.disc.mesh.diam[None, :, None, None]
    return u_high.with_data(blend(u_high.data, u_low.data, thr, cfg.function))


def apply_relative(u_high: NodalField, u_low: NodalField, cfg: FilterConfig,
                   variable: str, reference: np.ndarray | None = None) -> NodalField:
    """Blend one variable with nodewise threshold beta * max(g, floor).

    The gauge magnitude g is |uM| in the "state" gauge; in the "increment"
    gauge it is |uM - v| where ``reference`` carries the stage-input values v
    for this variable. A gauge that is identically zero returns the
    low-order value verbatim (degenerate but well defined).
    """
    if cfg.mode != "relative":
        raise ValueError("apply_relative needs a relative-mode config")
    if variable not in cfg.betas:
        raise KeyError(f"no beta configured for variable {variable!r}")
    i = u_high.names.index(variable)
    low = u_low.data[i]
    if cfg.gauge == "increment":
        if reference is None:
            raise ValueError("increment gauge needs the stage-input reference")
        gauge = np.abs(low - reference)
    elif variable in ("mom_x", "mom_y") and set(("rho", "mom_x", "mom_y", "energy")) <= set(u_high.names):
        # momentum components are gauged by the acoustic momentum scale
        # rho (|u| + c); a componentwise |m_x| vanishes on whole lines of any
        # rotating flow and would force first-order bands there
        g = cfg.gamma
        rho = u_low.var("rho")
        m2 = u_low.var("mom_x") ** 2 + u_low.var("mom_y") ** 2
        e = u_low.var("energy")
        p = (g - 1.0) * np.maximum(e - 0.5 * m2 / rho, 1e-300)
        gauge = np.sqrt(m2) + rho * np.sqrt(g * p / np.maximum(rho, 1e-300))
    else:
        gauge = np.abs(low)
    scale = float(np.max(np.abs(low)))  # floor is relative to the variable magnitude
    out = u_high.data.copy()
    if scale == 0.0 and float(np.max(gauge)) == 0.0:
        out[i] = low
        return u_high.with_data(out)
    thr = cfg.betas[variable] * np.maximum(gauge, cfg.denominator_floor * scale)
    out[i] = blend(u_high.data[i], low, thr, cfg.function)
    return u_high.with_data(out)


def apply_filter(u_high: NodalField, u_low: NodalField, alpha_dt: float,
                 cfg: FilterConfig, reference: NodalField | None = None) -> NodalField:
    """Blend all variables according to the configured mode."""
    if cfg.mode == "absolute":
        return apply_absolute(u_high, u_low, alpha_dt, cfg)
    out = u_high
    for idx, name in enumerate(u_high.names):
        ref = reference.data[idx] if reference is not None else None
        out = apply_relative(out, u_low, cfg, name, reference=ref)
    return out
