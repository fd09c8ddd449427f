"""Benchmark driver: sets a run up from a config, marches it to the final
time and writes every artifact (manifest, history, field dumps, report,
figures) into the output directory.
"""

from __future__ import annotations

import json
import os
import time as time_mod
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import output
from .amr import AdaptPolicy, adapt, compute_indicator
from .benchmarks import BenchmarkSetup, make_benchmark
from .config import RunConfig, filter_betas
from .dg import Discretization, NodalField
from .errors import StateError
from .filtering import FilterConfig
from .mesh import build_uniform
from .models import IdealGasEos, conserved_to_primitive
from .reference import ErrorReport, error_norms, radial_explosion_reference
from .stepping import FilteredStepper, StepController, scheme_for_degree, ssp2, ssp3


@dataclass
class RunReport:
    benchmark: str
    degree: int
    nx: int
    ny: int
    n_steps: int
    t_final: float
    n_cells_final: int
    wall_time_s: float
    extrema: dict[str, tuple[float, float]]          # over the whole run
    final_extrema: dict[str, tuple[float, float]]
    mass_drift_rel: dict[str, float]
    errors: dict[str, dict] = dc_field(default_factory=dict)
    artifacts: list[str] = dc_field(default_factory=list)
    failed: bool = False
    failure: str | None = None

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True)


def _make_filter(cfg: RunConfig, names) -> FilterConfig | None:
    if cfg.solver != "filtered" or not cfg.filter.enabled:
        return None
    f = cfg.filter
    if f.mode == "absolute":
        return FilterConfig(function=f.function, mode="absolute", c0=f.c0,
                            denominator_floor=f.denominator_floor)
    return FilterConfig(function=f.function, mode="relative",
                        betas=filter_betas(cfg, names),
                        denominator_floor=f.denominator_floor, gauge=f.gauge,
                        gamma=cfg.gamma)


def _setup_from_config(cfg: RunConfig) -> BenchmarkSetup:
    eos = IdealGasEos(cfg.gamma)
    kwargs = {"eos": eos}
    if cfg.benchmark == "sod":
        kwargs["nx"] = cfg.nx or 100
    if cfg.benchmark == "custom":
        kwargs.update(
            velocity=(cfg.custom.get("velocity_x", 1.0), cfg.custom.get("velocity_y", 0.0)),
            profile=cfg.custom.get("profile", "sine_x"),
            periodic=cfg.custom.get("periodic", True),
        )
    return make_benchmark(cfg.benchmark, **kwargs)


def _scheme(cfg: RunConfig):
    if cfg.scheme == "ssp2":
        return ssp2()
    if cfg.scheme == "ssp3":
        return ssp3()
    return scheme_for_degree(cfg.degree)


def _history_row(step, t, dt, field: NodalField):
    row = {"step": step, "t": float(t), "dt": float(dt), "n_cells": field.disc.mesh.n_cells}
    mm = field.minmax()
    totals = field.integral()
    for i, name in enumerate(field.names):
        row[f"min_{name}"] = mm[name][0]
        row[f"max_{name}"] = mm[name][1]
        row[f"integral_{name}"] = float(totals[i])
    return row


def run_benchmark(cfg: RunConfig, *, quiet: bool = True) -> RunReport:
    """Run one configured benchmark and write its artifacts.

    Solver failures are converted into a failed report after the partial
    history and the last valid field have been dumped.
    """
    t_start = time_mod.perf_counter()
    setup = _setup_from_config(cfg)
    eos = setup.model.eos if hasattr(setup.model, "eos") else None

    nx = cfg.nx or setup.default_nx
    ny = cfg.ny or setup.default_ny
    if cfg.benchmark == "sod":
        # keep strip cells square when the resolution is overridden
        setup = make_benchmark("sod", eos=IdealGasEos(cfg.gamma), nx=nx)
        ny = cfg.ny or 1
    t_final = cfg.t_final if cfg.t_final is not None else setup.t_final

    policy = None
    max_level = 0
    if cfg.amr.enabled:
        if setup.periodic_x or setup.periodic_y:
            raise StateError("adaptive runs need a non-periodic benchmark")
        policy = AdaptPolicy(
            refine_fraction=cfg.amr.refine_fraction,
            coarsen_fraction=cfg.amr.coarsen_fraction,
            max_level=cfg.amr.max_level,
            interval=cfg.amr.interval,
            initial_cycles=cfg.amr.initial_cycles,
        )
        max_level = cfg.amr.max_level

    mesh = build_uniform(nx, ny, setup.domain, periodic_x=setup.periodic_x,
                         periodic_y=setup.periodic_y, max_level=max_level)
    disc = Discretization(mesh, cfg.degree)
    field = NodalField.from_function(disc, setup.ic, names=setup.model.names)

    if policy is not None:
        for _ in range(policy.initial_cycles):
            eta = compute_indicator(field, setup.indicator_variable)
            new_field = adapt(field, policy, eta=eta)
            if new_field.disc is field.disc:
                break
            field = NodalField.from_function(new_field.disc, setup.ic,
                                             names=setup.model.names)

    filter_cfg = _make_filter(cfg, setup.model.names)
    scheme = _scheme(cfg)
    stepper = FilteredStepper(field.disc, setup.model, setup.bcs, scheme,
                              filter_cfg, mode=cfg.solver,
                              low_order_op=cfg.filter.low_order)
    controller = StepController(
        mode="courant" if cfg.time_mode == "courant" else "fixed",
        courant=cfg.courant, dt_fixed=cfg.dt, t_final=t_final)

    outdir = output.ensure_dir(cfg.output.directory)
    with open(os.path.join(outdir, "manifest.ini"), "w", encoding="utf-8") as fh:
        fh.write(cfg.manifest_text())
    artifacts = [os.path.join(outdir, "manifest.ini")]

    initial_integrals = field.integral()
    extrema = {name: list(v) for name, v in field.minmax().items()}
    rows = [_history_row(0, 0.0, 0.0, field)]
    dump_times = sorted(set(cfg.output.dump_times))
    dumped = set()

    t = 0.0
    step = 0
    failure = None
    try:
        while t < t_final - 1e-12 * max(1.0, t_final):
            if policy is not None and step > 0 and step % policy.interval == 0:
                eta = compute_indicator(field, setup.indicator_variable)
                new_field = adapt(field, policy, eta=eta)
                if new_field.disc is not field.disc:
                    field = new_field
                    stepper = stepper.rebind(field.disc)
            dt = controller.next_dt(field, setup.model, t, events=dump_times)
            field = stepper.step(field, t, dt)
            t += dt
            step += 1
            rows.append(_history_row(step, t, dt, field))
            for name, (lo, hi) in field.minmax().items():
                extrema[name][0] = min(extrema[name][0], lo)
                extrema[name][1] = max(extrema[name][1], hi)
            for td in dump_times:
                if td not in dumped and abs(t - td) <= 1e-9 * max(1.0, t_final):
                    artifacts.extend(_dump_field(field, outdir, f"field_t{td:g}", cfg, eos))
                    dumped.add(td)
            if not quiet and step % 200 == 0:
                print(f"  step {step:6d}  t = {t:.6f}  cells = {field.disc.mesh.n_cells}")
    except StateError as exc:
        failure = str(exc)

    wall = time_mod.perf_counter() - t_start
    if cfg.output.history:
        artifacts.append(output.emit_history_csv(rows, os.path.join(outdir, "history.csv")))
    artifacts.extend(_dump_field(field, outdir, "field_final", cfg, eos))

    final_integrals = field.integral()
    drift = {}
    for i, name in enumerate(field.names):
        ref = abs(float(initial_integrals[i]))
        d = float(final_integrals[i] - initial_integrals[i])
        drift[name] = d / ref if ref > 0 else d

    errors: dict[str, dict] = {}
    oracle = None
    if failure is None:
        if setup.exact is not None:
            reports = error_norms(field, lambda x, y: setup.exact(x, y, t))
            errors = {name: rep.as_dict() for name, rep in reports.items()}
            for name in errors:
                errors[name]["mass_drift_rel"] = drift.get(name, 0.0)
            if setup.report_primitives and eos is not None:
                errors.update(_primitive_errors(field, setup, t, eos, drift))
        elif setup.name == "explosion":
            oracle = radial_explosion_reference(t_final=t)
            errors["rho_radial"] = _radial_error(field, oracle, t)
        ref_path = _dump_reference(setup, t, eos, oracle, outdir)
        if ref_path:
            artifacts.append(ref_path)

    report = RunReport(
        benchmark=setup.name, degree=cfg.degree, nx=nx, ny=ny,
        n_steps=step, t_final=t, n_cells_final=field.disc.mesh.n_cells,
        wall_time_s=wall,
        extrema={k: (v[0], v[1]) for k, v in extrema.items()},
        final_extrema=field.minmax(),
        mass_drift_rel=drift,
        errors=errors,
        artifacts=artifacts,
        failed=failure is not None,
        failure=failure,
    )
    report_path = os.path.join(outdir, "report.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
    report.artifacts.append(report_path)

    if cfg.output.figures and failure is None:
        from . import figures

        report.artifacts.extend(
            figures.render_run_figures(field, setup, rows, t, oracle, outdir))

    if failure is not None and not quiet:
        print(f"run failed: {failure}")
    return report


def _dump_field(field, outdir, stem, cfg, eos):
    paths = []
    if "csv" in cfg.output.formats:
        paths.append(output.emit_field_csv(field, os.path.join(outdir, stem + ".csv"), eos))
    if "vtk" in cfg.output.formats:
        paths.append(output.emit_field_vtk(field, os.path.join(outdir, stem + ".vtk"), eos))
    return paths


def _primitive_errors(field, setup, t, eos, drift):
    """Error reports for velocity and pressure against the exact sampler."""
    disc = field.disc
    ex = np.asarray(setup.exact(disc.node_x, disc.node_y, t), dtype=float)
    rho_n, u_n, v_n, p_n = conserved_to_primitive(field.data, eos)
    rho_e, u_e, v_e, p_e = conserved_to_primitive(ex, eos)
    prim_field = NodalField(disc, np.stack([u_n, v_n, p_n]), ("u", "v", "p"))
    reports = error_norms(prim_field, np.stack([u_e, v_e, p_e]))
    return {name: rep.as_dict() for name, rep in reports.items()}


def _dump_reference(setup, t, eos, oracle, outdir):
    """Reference profiles as a CSV table for the plotting toolkit."""
    path = os.path.join(outdir, "reference.csv")
    if setup.name == "sod":
        from .reference import sod_exact

        xs = np.linspace(setup.domain[0], setup.domain[1], 2000)
        rho, u, p = sod_exact(xs, t, eos)
        rows = np.column_stack([xs, rho, u, p])
        header = "x,rho,u,p"
    elif setup.name == "explosion" and oracle is not None:
        rs = np.linspace(0.0, float(oracle.r_centers[-1]), 2000)
        rho, u, p = oracle.sample(rs, t)
        rows = np.column_stack([rs, rho, u, p])
        header = "r,rho,u,p"
    else:
        return None
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    return path


def _radial_error(field, oracle, t) -> dict:
    """Binned-density comparison against the radial reference."""
    from .reference import radial_bins

    centers, mean, vmin, vmax, count = radial_bins(field, "rho")
    ok = count > 0
    rho_ref = oracle.sample(centers[ok], t)[0]
    diff = mean[ok] - rho_ref
    width = centers[1] - centers[0]
    l1 = float(np.sum(np.abs(diff)) * width)
    rep = ErrorReport(
        l1_rel=l1 / float(np.sum(np.abs(rho_ref)) * width),
        l2_rel=float(np.sqrt(np.sum(diff ** 2) / np.sum(rho_ref ** 2))),
        linf_rel=float(np.max(np.abs(diff)) / np.max(np.abs(rho_ref))),
        max_value=float(np.nanmax(vmax)),
        min_value=float(np.nanmin(vmin)),
    )
    return rep.as_dict()


def run_convergence(cfg: RunConfig, levels: int, *, variable: str = "rho",
                    quiet: bool = True):
    """Run the benchmark at doubling resolutions and collect table rows."""
    if levels < 2:
        raise ValueError("a convergence study needs at least two levels")
    base_nx = cfg.nx or _setup_from_config(cfg).default_nx
    base_ny = cfg.ny
    rows = []
    base_dir = cfg.output.directory
    for lvl in range(levels):
        nx = base_nx * (2 ** lvl)
        sub = RunConfig(**{**cfg.__dict__})
        sub.nx = nx
        sub.ny = base_ny * (2 ** lvl) if base_ny else None
        sub.output = type(cfg.output)(
            directory=os.path.join(base_dir, f"n{nx}"),
            formats=cfg.output.formats, figures=False,
            history=cfg.output.history, dump_times=())
        report = run_benchmark(sub, quiet=quiet)
        if report.failed:
            raise StateError(f"convergence level nx={nx} failed: {report.failure}")
        key = variable if variable in report.errors else list(report.errors)[0]
        rows.append({"n_el": nx, "errors": report.errors[key], "report": report})
    return rows
