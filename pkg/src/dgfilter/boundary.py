"""Exterior-state rules for boundary faces.

Periodic coupling never reaches this module: periodic boundaries are wrapped
into interior faces at mesh construction. Every other boundary produces an
exterior ("ghost") trace that feeds the same numerical flux as interior
faces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


class BoundaryRule:
    pass


@dataclass(frozen=True)
class Transmissive(BoundaryRule):
    """Zero-gradient outflow: exterior trace copies the interior one."""


@dataclass(frozen=True)
class InflowZero(BoundaryRule):
    """Scalar exterior value 0; upwinding makes this a dissipative inflow."""


@dataclass(frozen=True)
class FixedState(BoundaryRule):
    """Dirichlet data: a constant conserved state held for all time."""

    state: tuple[float, ...]


def apply_boundary(rule: BoundaryRule, interior: np.ndarray, x, y, t, nx, ny, model) -> np.ndarray:
    """Exterior trace for one boundary face group.

    ``interior`` is shaped (n_vars, ...); coordinates and the outward normal
    are accepted for rules that may need them.
    """
    if isinstance(rule, Transmissive):
        return interior
    if isinstance(rule, InflowZero):
        return np.zeros_like(interior)
    if isinstance(rule, FixedState):
        state = np.asarray(rule.state, dtype=float)
        if state.size != interior.shape[0]:
            raise ConfigError(
                f"boundary state has {state.size} components, model needs {interior.shape[0]}"
            )
        return np.broadcast_to(
            state.reshape((-1,) + (1,) * (interior.ndim - 1)), interior.shape
        )
    raise ConfigError(f"unknown boundary rule {rule!r}")


def uniform_boundary(rule: BoundaryRule) -> dict[str, BoundaryRule]:
    return {side: rule for side in ("xmin", "xmax", "ymin", "ymax")}
