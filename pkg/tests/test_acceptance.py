"""Acceptance suite: every exit criterion at its stated tolerance.

Each test prints one PASS line when its criterion holds; the heavyweight
benchmark computations are shared through module-scoped fixtures. Runs
tagged ``slow`` take minutes at desk scale; deselect with ``-m "not slow"``
for a quick development cycle.

Two sub-assertions are known to fail for this implementation (the smooth
vortex at beta = 0.7 converges instead of degrading, and the degree-2
shock tube keeps a more smeared contact than the quoted error bound);
they are kept faithful to their stated tolerances rather than loosened.
The analysis lives in the repository notes.
"""

import math
import time

import numpy as np
import pytest

import dgfilter as dgf
from dgfilter.config import parse_config
from dgfilter.dg import Discretization, NodalField
from dgfilter.filtering import blend, filter_f2
from dgfilter.models import IdealGasEos
from dgfilter.reference import (
    radial_bins,
    radial_explosion_reference,
    riemann_star_state,
    convergence_rate,
)
from dgfilter.runner import run_benchmark
from dgfilter.stepping import ssp2, ssp3, ssp_stage


def _report(name, detail):
    print(f"[acceptance] {name}: PASS ({detail})")


def _run(text, **overrides):
    items = [f"{k}={v}" for k, v in overrides.items()]
    rep = run_benchmark(parse_config(text, overrides=items))
    assert not rep.failed, f"solver failure: {rep.failure}"
    return rep


VORTEX = """
[run]
benchmark = isentropic_vortex
degree = {k}
[time]
courant = 0.1
[filter]
function = f1
mode = relative
beta = {beta}
gauge = state
low_order = cell
[mesh]
nx = {n}
ny = {n}
[output]
directory = {out}
figures = false
history = false
"""

SBR = """
[run]
benchmark = solid_body_rotation
degree = 1
scheme = ssp2
solver = {solver}
[mesh]
nx = 120
ny = 120
[time]
courant = 0.1
[filter]
enabled = {enabled}
function = f1
mode = {mode}
beta = 0.4
c0 = 5.0
gauge = increment
low_order = {low}
[output]
directory = {out}
figures = false
history = false
"""

SOD = """
[run]
benchmark = sod
degree = {k}
[mesh]
nx = {n}
[time]
mode = fixed_dt
dt = {dt}
[filter]
function = f2
mode = relative
beta = {beta}
gauge = increment
low_order = subcell
[output]
directory = {out}
figures = false
history = false
"""


# ----------------------------------------------------------------------
# 1. filter algebra
# ----------------------------------------------------------------------
def test_filter_algebra_invariants():
    rng = np.random.default_rng(2024)
    n = 100_000
    u_h = rng.uniform(-3.0, 3.0, n)
    u_m = rng.uniform(-3.0, 3.0, n)
    thr = rng.uniform(1e-6, 4.0, n)
    t0 = time.perf_counter()
    diff = np.abs(u_h - u_m)
    passed = diff <= thr

    out1 = blend(u_h, u_m, thr, "f1")
    assert np.array_equal(out1[passed], u_h[passed])
    assert np.array_equal(out1[~passed], u_m[~passed])

    out2 = blend(u_h, u_m, thr, "f2")
    assert np.array_equal(out2[passed], u_h[passed])
    hard = diff >= 2.0 * thr
    assert np.array_equal(out2[hard], u_m[hard])
    trans = ~passed & ~hard
    want = u_m[trans] + thr[trans] * filter_f2((u_h[trans] - u_m[trans]) / thr[trans])
    assert np.allclose(out2[trans], want, atol=1e-14)

    lo = np.minimum(u_h, u_m) - thr
    hi = np.maximum(u_h, u_m) + thr
    for out in (out1, out2):
        assert np.all(out >= lo - 1e-14) and np.all(out <= hi + 1e-14)
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    _report("filter algebra", f"1e5 triples in {elapsed:.2f}s")


# ----------------------------------------------------------------------
# 2. SSP order
# ----------------------------------------------------------------------
def test_ssp_error_ratios():
    def decay(y, t, dt):
        return y - dt * y

    def err(scheme, dt):
        y, t = 1.0, 0.0
        while t < 1.0 - 1e-12:
            h = min(dt, 1.0 - t)
            prev = y
            for s in range(scheme.n_stages):
                prev = ssp_stage(scheme, s, y, prev, h, decay)
            y = prev
            t += h
        return abs(y - math.exp(-1.0))

    t0 = time.perf_counter()
    for scheme, lo, hi in ((ssp2(), 3.6, 4.4), (ssp3(), 7.2, 8.8)):
        errs = [err(scheme, dt) for dt in (0.1, 0.05, 0.025)]
        ratios = [errs[i] / errs[i + 1] for i in range(2)]
        for r in ratios:
            assert lo <= r <= hi, ratios
    assert time.perf_counter() - t0 < 1.0
    _report("SSP order", "ratio windows [3.6,4.4] and [7.2,8.8]")


# ----------------------------------------------------------------------
# 3-4. vortex convergence
# ----------------------------------------------------------------------
def _vortex_errors(k, beta, meshes, tmp):
    errs = []
    for n in meshes:
        rep = _run(VORTEX.format(k=k, beta=beta, n=n, out=tmp / f"v{k}_{beta}_{n}"))
        errs.append(rep.errors["rho"]["l1_rel"])
    return errs


@pytest.mark.slow
def test_vortex_convergence_k1(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("vortex_k1")
    errs = _vortex_errors(1, 1.0, (20, 40, 80), tmp)
    rates = convergence_rate(errs, 2.0)
    print(f"  k=1 beta=1.0 L1 errors {errs} rates {rates}")
    for r in rates:
        assert 1.8 <= r <= 2.4, (errs, rates)
    _report("vortex k=1 beta=1", f"rates {[f'{r:.2f}' for r in rates]}")


@pytest.mark.slow
def test_vortex_k1_low_beta_degrades(tmp_path_factory):
    # stated tolerance kept although this implementation's filter
    # deactivates under refinement at beta = 0.7 (see repository notes)
    tmp = tmp_path_factory.mktemp("vortex_k1_lo")
    errs = _vortex_errors(1, 0.7, (20, 40, 80), tmp)
    rates = convergence_rate(errs, 2.0)
    print(f"  k=1 beta=0.7 L1 errors {errs} rates {rates}")
    assert rates[-1] < 1.0, (errs, rates)
    _report("vortex k=1 beta=0.7 degradation", f"finest rate {rates[-1]:.2f}")


@pytest.mark.slow
def test_vortex_convergence_k2(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("vortex_k2")
    errs = _vortex_errors(2, 1.0, (20, 40, 80), tmp)
    rates = convergence_rate(errs, 2.0)
    print(f"  k=2 beta=1.0 L1 errors {errs} rates {rates}")
    for r in rates:
        assert 2.2 <= r <= 3.1, (errs, rates)
    _report("vortex k=2 beta=1", f"rates {[f'{r:.2f}' for r in rates]}")


# ----------------------------------------------------------------------
# 5-6. solid body rotation
# ----------------------------------------------------------------------
@pytest.fixture(scope="module")
def sbr_runs(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("sbr")
    runs = {}
    runs["filtered"] = _run(SBR.format(solver="filtered", enabled="true",
                                       mode="relative", low="subcell", out=tmp / "rel"))
    runs["unfiltered"] = _run(SBR.format(solver="high_order", enabled="false",
                                         mode="relative", low="subcell", out=tmp / "hi"))
    # the cell-average fallback makes the heavily-thresholded absolute run
    # the same scheme the pure-Q0 comparison uses
    runs["absolute"] = _run(SBR.format(solver="filtered", enabled="true",
                                       mode="absolute", low="cell", out=tmp / "abs"))
    runs["q0"] = _run(SBR.format(solver="low_order", enabled="false",
                                 mode="relative", low="cell", out=tmp / "q0"))
    runs["dir"] = tmp
    return runs


@pytest.mark.slow
def test_solid_body_rotation_bounds(sbr_runs):
    lo, hi = sbr_runs["filtered"].extrema["u"]
    print(f"  filtered extrema over run: [{lo:.3e}, {hi:.6f}]")
    assert hi <= 1.03
    assert lo >= -5e-3
    ulo, uhi = sbr_runs["unfiltered"].extrema["u"]
    assert uhi > 1.05, "unfiltered run should oscillate"
    _report("solid body rotation bounds",
            f"filtered max {hi:.4f}, min {lo:.1e}; unfiltered max {uhi:.2f}")


def _l2_distance(dir_a, dir_b):
    from dgfilter.output import read_field_csv

    a = read_field_csv(str(dir_a / "field_final.csv"))
    b = read_field_csv(str(dir_b / "field_final.csv"))
    assert np.array_equal(a["x"], b["x"])
    return float(np.sqrt(np.mean((a["u"] - b["u"]) ** 2)))


@pytest.mark.slow
def test_absolute_filter_tracks_low_order(sbr_runs):
    tmp = sbr_runs["dir"]
    d_abs = _l2_distance(tmp / "abs", tmp / "q0")
    d_hi = _l2_distance(tmp / "hi", tmp / "q0")
    print(f"  |abs - q0| = {d_abs:.4f}, |unfiltered - q0| = {d_hi:.4f}")
    assert d_abs < 0.25 * d_hi
    _report("absolute filter is low-order-like", f"ratio {d_abs / d_hi:.3f}")


# ----------------------------------------------------------------------
# 7-8. shock tube
# ----------------------------------------------------------------------
@pytest.fixture(scope="module")
def sod_k1(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("sod1")
    return _run(SOD.format(k=1, n=100, dt=5e-4, beta=0.3, out=tmp))


@pytest.fixture(scope="module")
def sod_k2(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("sod2")
    return _run(SOD.format(k=2, n=250, dt=1e-4, beta=1.4, out=tmp))


@pytest.mark.slow
def test_sod_k1_bounds_and_error(sod_k1):
    lo, hi = sod_k1.extrema["rho"]
    linf = sod_k1.errors["rho"]["linf_rel"]
    print(f"  k=1 density in [{lo:.5f}, {hi:.5f}], Linf {linf:.3e}")
    assert 0.125 - 5e-3 <= lo
    assert hi <= 1.0 + 5e-3
    assert linf <= 0.12
    _report("sod k=1", f"rho in [{lo:.4f}, {hi:.4f}], Linf {linf:.3f}")


@pytest.mark.slow
def test_sod_k2_density_extrema(sod_k2):
    # stated tolerance kept; the undershoot of this implementation sits a
    # little outside the quoted window (see repository notes)
    lo, hi = sod_k2.extrema["rho"]
    print(f"  k=2 density in [{lo:.5f}, {hi:.5f}]")
    assert hi <= 1.0 + 5e-3
    assert lo >= 0.125 - 2e-3
    _report("sod k=2 extrema", f"[{lo:.4f}, {hi:.4f}]")


@pytest.mark.slow
def test_sod_k2_density_error(sod_k2):
    # stated tolerance kept although this implementation smears the contact
    # more than the quoted bound (see repository notes)
    linf = sod_k2.errors["rho"]["linf_rel"]
    print(f"  k=2 Linf density error {linf:.3e}")
    assert linf <= 3.5e-2
    _report("sod k=2 error", f"Linf {linf:.3e}")


# ----------------------------------------------------------------------
# 9. Riemann solver oracle
# ----------------------------------------------------------------------
def test_riemann_oracle():
    from dgfilter.models import euler_flux

    t0 = time.perf_counter()
    star = riemann_star_state((1.0, 0.0, 1.0), (0.125, 0.0, 0.1))
    assert star.p_star == pytest.approx(0.30313, abs=1e-4)
    assert star.u_star == pytest.approx(0.9275, abs=5e-4)
    eos = IdealGasEos()
    g = eos.gamma
    rho_r, u_r, p_r = 0.125, 0.0, 0.1
    c_r = np.sqrt(g * p_r / rho_r)
    s = u_r + c_r * np.sqrt((g + 1) / (2 * g) * star.p_star / p_r + (g - 1) / (2 * g))
    w_r = np.array([rho_r, 0.0, 0.0, p_r / (g - 1)])
    w_s = np.array([star.rho_star_right, star.rho_star_right * star.u_star, 0.0,
                    star.p_star / (g - 1) + 0.5 * star.rho_star_right * star.u_star ** 2])
    rh = euler_flux(w_s, eos)[0] - euler_flux(w_r, eos)[0] - s * (w_s - w_r)
    assert np.abs(rh).max() < 1e-10
    assert time.perf_counter() - t0 < 1.0
    _report("riemann oracle", f"p*={star.p_star:.5f}, u*={star.u_star:.5f}")


# ----------------------------------------------------------------------
# 10. explosion
# ----------------------------------------------------------------------
@pytest.mark.slow
def test_explosion_radial_structure(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("explosion")
    text = """
[run]
benchmark = explosion
degree = 1
[mesh]
nx = 200
ny = 200
[time]
courant = 0.1
[filter]
function = f2
mode = relative
beta = 1.0
gauge = increment
low_order = subcell
[output]
directory = {out}
figures = false
history = false
""".format(out=tmp)
    rep = _run(text)
    from dgfilter.output import read_field_csv

    cols = read_field_csv(str(tmp / "field_final.csv"))
    r = np.hypot(cols["x"], cols["y"])
    rho = cols["rho"]
    n_bins = 400
    edges = np.linspace(0.0, 1.2, n_bins + 1)
    idx = np.clip(np.digitize(r, edges) - 1, 0, n_bins - 1)
    inside = r <= 1.2
    count = np.bincount(idx[inside], minlength=n_bins)
    mean = np.bincount(idx[inside], weights=rho[inside], minlength=n_bins)
    mean = np.where(count > 0, mean / np.maximum(count, 1), np.nan)
    vmin = np.full(n_bins, np.inf)
    vmax = np.full(n_bins, -np.inf)
    np.minimum.at(vmin, idx[inside], rho[inside])
    np.maximum.at(vmax, idx[inside], rho[inside])
    ok = count > 0
    centers = 0.5 * (edges[:-1] + edges[1:])

    assert np.nanmin(mean[ok]) >= 0.12
    assert np.nanmax(mean[ok]) <= 1.01

    oracle = radial_explosion_reference(t_final=rep.t_final)
    rho_ref_edges = oracle.sample(edges, rep.t_final)[0]
    rho_ref = oracle.sample(centers, rep.t_final)[0]
    l1 = float(np.sum(np.abs(mean[ok] - rho_ref[ok])) * (edges[1] - edges[0]))
    assert l1 <= 5e-2

    # angular symmetry away from the interface bins
    jumpy = np.abs(np.diff(rho_ref_edges)) > 0.02
    excluded = jumpy.copy()
    for shift in range(1, 9):
        excluded[shift:] |= jumpy[:-shift]
        excluded[:-shift] |= jumpy[shift:]
    spread = vmax - vmin
    keep = ok & ~excluded
    worst = float(np.max(spread[keep]))
    print(f"  binned range [{np.nanmin(mean[ok]):.4f}, {np.nanmax(mean[ok]):.4f}], "
          f"L1 vs oracle {l1:.2e}, max spread {worst:.3f}")
    assert worst <= 0.05
    _report("explosion", f"L1 {l1:.2e}, spread {worst:.3f}")


# ----------------------------------------------------------------------
# 11. conservation
# ----------------------------------------------------------------------
def test_conservation_per_substep(tmp_path):
    from dgfilter.dg import DGOperator
    from dgfilter.fv import FVOperator, project_to_averages
    from dgfilter.models import EulerModel, isentropic_vortex_state

    eos = IdealGasEos()
    em = EulerModel(eos)
    mesh = dgf.build_uniform(16, 16, (-5, 5, -5, 5), periodic_x=True, periodic_y=True)
    disc = Discretization(mesh, 2)
    f = NodalField.from_function(disc, lambda x, y: isentropic_vortex_state(x, y, eos),
                                 names=em.names)
    op = DGOperator(disc, em, {})
    before = f.integral()
    after = op.substep(f, 0.0, 1e-3).integral()
    scale = np.maximum(np.abs(before), 1.0)
    assert np.all(np.abs(after - before) / scale < 1e-12)

    avg = project_to_averages(f)
    fv = FVOperator(mesh, em, {})
    after_fv = fv.substep(avg, 0.0, 1e-3).integral()
    assert np.all(np.abs(after_fv - avg.integral()) / scale < 1e-12)

    # filtered runs expose the drift as a diagnostic
    rep = _run("""
[run]
benchmark = custom
degree = 1
[mesh]
nx = 10
ny = 10
[time]
courant = 0.2
t_final = 0.05
[filter]
beta = 0.5
[output]
directory = {out}
figures = false
""".format(out=tmp_path / "drift"))
    assert "u" in rep.mass_drift_rel
    _report("conservation", "DG and FV substeps conserve to 1e-12; drift reported")


# ----------------------------------------------------------------------
# 12. AMR
# ----------------------------------------------------------------------
def test_amr_transfer_invariants():
    from dgfilter.amr import transfer_nodal_data
    from dgfilter.mesh import coarsen_with_transfer, refine_with_transfer

    rng = np.random.default_rng(77)
    mesh = dgf.build_uniform(4, 4, (0, 2, 0, 2), max_level=2)
    disc = Discretization(mesh, 2)
    f = NodalField(disc, rng.normal(size=(3, mesh.n_cells, 3, 3)), ("a", "b", "c"))
    tot = f.integral()
    mesh2, transfers = refine_with_transfer(mesh, [1, 6, 11])
    data = f.data
    for tr in transfers:
        data = transfer_nodal_data(data, tr, disc.line)
    disc2 = Discretization(mesh2, 2)
    assert np.allclose(NodalField(disc2, data, f.names).integral(), tot, rtol=1e-12)
    mesh3, tr3 = coarsen_with_transfer(mesh2, np.nonzero(mesh2.level == 1)[0])
    data3 = transfer_nodal_data(data, tr3, disc.line)
    disc3 = Discretization(mesh3, 2)
    assert np.allclose(NodalField(disc3, data3, f.names).integral(), tot, rtol=1e-12)
    _report("AMR transfer", "integrals preserved through refine and coarsen")


@pytest.mark.slow
def test_adaptive_solid_body_rotation(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("sbr_amr")
    text = """
[run]
benchmark = solid_body_rotation
degree = 1
scheme = ssp2
[mesh]
nx = 120
ny = 120
[time]
courant = 0.1
[filter]
function = f1
mode = relative
beta = 0.4
gauge = increment
low_order = subcell
[amr]
enabled = true
max_level = 2
interval = 5
initial_cycles = 3
[output]
directory = {out}
figures = false
history = false
""".format(out=tmp)
    rep = _run(text)
    lo, hi = rep.extrema["u"]
    print(f"  adaptive extrema [{lo:.3e}, {hi:.6f}], final cells {rep.n_cells_final}")
    assert hi <= 1.03
    assert lo >= -2e-3
    # adaptive cell count is an order-of-magnitude target only
    assert 28119 / 2 <= rep.n_cells_final <= 28119 * 2
    _report("adaptive solid body rotation",
            f"max {hi:.4f}, min {lo:.1e}, {rep.n_cells_final} cells")


# ----------------------------------------------------------------------
# 13. 2D Riemann smoke test
# ----------------------------------------------------------------------
@pytest.mark.slow
def test_riemann2d_smoke(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("riemann2d")
    text = """
[run]
benchmark = riemann2d
degree = 2
[mesh]
nx = 100
ny = 100
[time]
courant = 0.1
[filter]
function = f2
mode = relative
beta = 0.25
gauge = increment
low_order = subcell
[amr]
enabled = true
max_level = 1
interval = 5
initial_cycles = 2
[output]
directory = {out}
figures = false
history = false
""".format(out=tmp)
    rep = _run(text)
    lo, hi = rep.extrema["rho"]
    print(f"  density range over run [{lo:.4f}, {hi:.4f}]")
    assert 0.2 <= lo and hi <= 2.0
    _report("riemann2d smoke", f"rho in [{lo:.3f}, {hi:.3f}]")


# ----------------------------------------------------------------------
# 14. runtime overhead
# ----------------------------------------------------------------------
@pytest.mark.slow
def test_filtered_overhead_factor(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("overhead")
    base = """
[run]
benchmark = solid_body_rotation
degree = 1
solver = {solver}
[mesh]
nx = 60
ny = 60
[time]
courant = 0.1
t_final = 0.6
[filter]
enabled = {enabled}
beta = 0.4
gauge = increment
low_order = subcell
[output]
directory = {out}
figures = false
history = false
"""
    rep_f = _run(base.format(solver="filtered", enabled="true", out=tmp / "f"))
    rep_u = _run(base.format(solver="high_order", enabled="false", out=tmp / "u"))
    ratio = rep_f.wall_time_s / rep_u.wall_time_s
    print(f"  filtered {rep_f.wall_time_s:.2f}s vs unfiltered {rep_u.wall_time_s:.2f}s")
    assert ratio < 3.0
    _report("overhead", f"time ratio {ratio:.2f}")
