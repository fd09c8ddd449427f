"""Benchmark problem definitions the CLI dispatches on.

Each benchmark bundles the PDE model, domain, boundary rules, initial data
and (when one exists) a reference sampler for error reporting. The ``sod``
tube is run as a one-cell-high strip of square cells; its transmissive
top/bottom rules keep the solution exactly one dimensional.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import models, reference
from .boundary import BoundaryRule, FixedState, InflowZero, Transmissive, uniform_boundary
from .errors import ConfigError
from .models import AdvectionModel, EulerModel, IdealGasEos


@dataclass
class BenchmarkSetup:
    name: str
    model: object
    domain: tuple[float, float, float, float]
    periodic_x: bool
    periodic_y: bool
    bcs: dict[str, BoundaryRule]
    ic: Callable  # ic(x, y) -> (n_vars, ...) conserved state
    t_final: float
    default_nx: int
    default_ny: int
    exact: Callable | None = None          # exact(x, y, t) -> (n_vars, ...)
    indicator_variable: str = "u"
    report_primitives: bool = False


def _rotate(x, y, t, omega=1.0):
    c, s = np.cos(omega * t), np.sin(omega * t)
    return c * x + s * y, -s * x + c * y


def solid_body_rotation_setup(eos=None, **_) -> BenchmarkSetup:
    model = AdvectionModel(models.solid_body_velocity(1.0))

    def exact(x, y, t):
        x0, y0 = _rotate(x, y, t)
        return models.solid_body_rotation_ic(x0, y0)

    return BenchmarkSetup(
        name="solid_body_rotation",
        model=model,
        domain=(-0.5, 0.5, -0.5, 0.5),
        periodic_x=False,
        periodic_y=False,
        bcs=uniform_boundary(InflowZero()),
        ic=models.solid_body_rotation_ic,
        t_final=2.0 * np.pi,
        default_nx=120,
        default_ny=120,
        exact=exact,
        indicator_variable="u",
    )


def isentropic_vortex_setup(eos=None, **_) -> BenchmarkSetup:
    eos = eos or IdealGasEos()
    model = EulerModel(eos)
    domain = (-5.0, 5.0, -5.0, 5.0)

    def exact(x, y, t):
        return reference.vortex_exact(x, y, t, eos, domain=domain)

    return BenchmarkSetup(
        name="isentropic_vortex",
        model=model,
        domain=domain,
        periodic_x=True,
        periodic_y=True,
        bcs={},
        ic=lambda x, y: models.isentropic_vortex_state(x, y, eos),
        t_final=10.0,
        default_nx=40,
        default_ny=40,
        exact=exact,
        indicator_variable="rho",
    )


def sod_setup(eos=None, nx=100, **_) -> BenchmarkSetup:
    eos = eos or IdealGasEos()
    model = EulerModel(eos)
    left = models.primitive_to_conserved(
        models.SOD_LEFT[0], models.SOD_LEFT[1], 0.0, models.SOD_LEFT[2], eos)
    right = models.primitive_to_conserved(
        models.SOD_RIGHT[0], models.SOD_RIGHT[1], 0.0, models.SOD_RIGHT[2], eos)
    bcs = {
        "xmin": FixedState(tuple(left)),
        "xmax": FixedState(tuple(right)),
        "ymin": Transmissive(),
        "ymax": Transmissive(),
    }
    height = 1.0 / nx  # square cells in a one-cell strip

    def exact(x, y, t):
        rho, u, p = reference.sod_exact(x, t, eos)
        return models.primitive_to_conserved(rho, u, np.zeros_like(u), p, eos)

    return BenchmarkSetup(
        name="sod",
        model=model,
        domain=(-0.5, 0.5, 0.0, height),
        periodic_x=False,
        periodic_y=False,
        bcs=bcs,
        ic=lambda x, y: models.sod_ic(x, y, eos),
        t_final=0.2,
        default_nx=nx,
        default_ny=1,
        exact=exact,
        indicator_variable="rho",
        report_primitives=True,
    )


def explosion_setup(eos=None, **_) -> BenchmarkSetup:
    eos = eos or IdealGasEos()
    model = EulerModel(eos)
    return BenchmarkSetup(
        name="explosion",
        model=model,
        domain=(-1.0, 1.0, -1.0, 1.0),
        periodic_x=False,
        periodic_y=False,
        bcs=uniform_boundary(Transmissive()),
        ic=lambda x, y: models.explosion_ic(x, y, eos),
        t_final=0.2,
        default_nx=200,
        default_ny=200,
        exact=None,  # radial oracle handled separately (profiles, not fields)
        indicator_variable="rho",
        report_primitives=True,
    )


def riemann2d_setup(eos=None, **_) -> BenchmarkSetup:
    eos = eos or IdealGasEos()
    model = EulerModel(eos)
    return BenchmarkSetup(
        name="riemann2d",
        model=model,
        domain=(0.0, 1.0, 0.0, 1.0),
        periodic_x=False,
        periodic_y=False,
        bcs=uniform_boundary(Transmissive()),
        ic=lambda x, y: models.riemann2d_ic(x, y, eos),
        t_final=0.25,
        default_nx=200,
        default_ny=200,
        exact=None,
        indicator_variable="rho",
        report_primitives=True,
    )


_CUSTOM_PROFILES = {
    "sine_x": lambda x, y: np.sin(2.0 * np.pi * x)[None],
    "sine_xy": lambda x, y: (np.sin(2.0 * np.pi * x) * np.sin(2.0 * np.pi * y))[None],
    "square": lambda x, y: np.where(np.abs(x - 0.5) < 0.25, 1.0, 0.0)[None],
}


def custom_setup(eos=None, velocity=(1.0, 0.0), profile="sine_x", periodic=True, **_) -> BenchmarkSetup:
    """Free-form scalar advection run with a constant velocity."""
    ax, ay = float(velocity[0]), float(velocity[1])
    model = AdvectionModel(lambda x, y, t: (ax * np.ones_like(x), ay * np.ones_like(y)))
    if profile not in _CUSTOM_PROFILES:
        raise ConfigError(f"custom.profile: unknown profile {profile!r}")

    def ic(x, y):
        return _CUSTOM_PROFILES[profile](np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    def exact(x, y, t):
        return ic(np.asarray(x) - ax * t, np.asarray(y) - ay * t)

    return BenchmarkSetup(
        name="custom",
        model=model,
        domain=(0.0, 1.0, 0.0, 1.0),
        periodic_x=periodic,
        periodic_y=periodic,
        bcs={} if periodic else uniform_boundary(InflowZero()),
        ic=ic,
        t_final=1.0,
        default_nx=32,
        default_ny=32,
        exact=exact if periodic else None,
        indicator_variable="u",
    )


_SETUPS = {
    "solid_body_rotation": solid_body_rotation_setup,
    "isentropic_vortex": isentropic_vortex_setup,
    "sod": sod_setup,
    "explosion": explosion_setup,
    "riemann2d": riemann2d_setup,
    "custom": custom_setup,
}


def make_benchmark(name: str, **kwargs) -> BenchmarkSetup:
    if name not in _SETUPS:
        raise ConfigError(
            f"run.benchmark: unknown benchmark {name!r}; choose from {sorted(_SETUPS)}"
        )
    return _SETUPS[name](**kwargs)
