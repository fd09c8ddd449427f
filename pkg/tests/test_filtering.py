import numpy as np
import pytest

import dgfilter as dgf
from dgfilter.dg import Discretization, NodalField
from dgfilter.filtering import (
    FilterConfig,
    apply_absolute,
    apply_filter,
    apply_relative,
    blend,
    filter_f1,
    filter_f2,
)


def test_f1_point_values():
    assert filter_f1(0.5) == pytest.approx(0.5)
    assert filter_f1(2.0) == 0.0
    assert filter_f1(-1.0) == pytest.approx(-1.0)  # boundary is inclusive


def test_f2_point_values():
    assert filter_f2(0.5) == pytest.approx(0.5)
    assert filter_f2(1.5) == pytest.approx(0.5)
    assert filter_f2(3.0) == 0.0
    assert filter_f2(-1.5) == pytest.approx(-0.5)


def test_filter_functions_are_odd():
    x = np.linspace(-3, 3, 41)
    assert np.allclose(filter_f1(-x), -filter_f1(x))
    assert np.allclose(filter_f2(-x), -filter_f2(x))


def _field(disc, value):
    data = np.full((1, disc.mesh.n_cells, disc.n1d, disc.n1d), float(value))
    return NodalField(disc, data, ("u",))


@pytest.fixture()
def disc():
    mesh = dgf.build_uniform(2, 2, (0, 1, 0, 1))
    return Discretization(mesh, 1)


def test_relative_pass_through(disc):
    cfg = FilterConfig(function="f1", mode="relative", betas={"u": 0.4})
    out = apply_relative(_field(disc, 1.3), _field(disc, 1.0), cfg, "u")
    assert np.all(out.data == 1.3)


def test_relative_cut_off(disc):
    cfg = FilterConfig(function="f1", mode="relative", betas={"u": 0.4})
    out = apply_relative(_field(disc, 2.0), _field(disc, 1.0), cfg, "u")
    assert np.all(out.data == 1.0)


def test_relative_f2_transition(disc):
    cfg = FilterConfig(function="f2", mode="relative", betas={"u": 0.4})
    out = apply_relative(_field(disc, 1.6), _field(disc, 1.0), cfg, "u")
    assert np.allclose(out.data, 1.2, atol=1e-14)


def test_relative_zero_low_order_returns_low_order(disc):
    cfg = FilterConfig(function="f1", mode="relative", betas={"u": 0.4})
    out = apply_relative(_field(disc, 0.5), _field(disc, 0.0), cfg, "u")
    assert np.all(out.data == 0.0)


def test_relative_missing_beta_rejected(disc):
    cfg = FilterConfig(function="f1", mode="relative", betas={"u": 0.4})
    with pytest.raises(KeyError):
        apply_relative(_field(disc, 1.0), _field(disc, 1.0), cfg, "rho")


def test_absolute_pass_and_cut(disc):
    cfg = FilterConfig(function="f1", mode="absolute", c0=1.0)
    h = disc.mesh.diam[0]
    dt = 0.1
    thr = h * dt
    u_m = _field(disc, 1.0)
    assert np.all(apply_absolute(_field(disc, 1.0 + 0.5 * thr), u_m, dt, cfg).data
                  == 1.0 + 0.5 * thr)
    assert np.all(apply_absolute(_field(disc, 1.0 + 10.0 * thr), u_m, dt, cfg).data == 1.0)
    assert np.all(apply_absolute(u_m, u_m, dt, cfg).data == 1.0)


def test_absolute_requires_positive_step(disc):
    cfg = FilterConfig(function="f1", mode="absolute", c0=1.0)
    with pytest.raises(ValueError):
        apply_absolute(_field(disc, 1.0), _field(disc, 1.0), 0.0, cfg)


def test_config_validation():
    with pytest.raises(ValueError):
        FilterConfig(function="f3")
    with pytest.raises(ValueError):
        FilterConfig(mode="absolute")  # needs c0
    with pytest.raises(ValueError):
        FilterConfig(mode="relative", betas={"u": -1.0})
    with pytest.raises(ValueError):
        FilterConfig(mode="relative", betas={"u": 1.0}, denominator_floor=0.0)
    with pytest.raises(ValueError):
        FilterConfig(mode="relative", betas={"u": 1.0}, gauge="sideways")


def test_blend_algebra_invariants():
    # pass-through, cut-off and boundedness on a large random sample
    rng = np.random.default_rng(42)
    n = 100_000
    u_h = rng.uniform(-2.0, 2.0, n)
    u_m = rng.uniform(-2.0, 2.0, n)
    thr = rng.uniform(1e-3, 3.0, n)
    diff = np.abs(u_h - u_m)

    out1 = blend(u_h, u_m, thr, "f1")
    passed = diff <= thr
    assert np.array_equal(out1[passed], u_h[passed])
    assert np.array_equal(out1[~passed], u_m[~passed])

    out2 = blend(u_h, u_m, thr, "f2")
    assert np.array_equal(out2[passed], u_h[passed])
    hard = diff >= 2.0 * thr
    assert np.array_equal(out2[hard], u_m[hard])
    lo = np.minimum(u_h, u_m) - thr
    hi = np.maximum(u_h, u_m) + thr
    for out in (out1, out2):
        assert np.all(out >= lo - 1e-14) and np.all(out <= hi + 1e-14)
    # F2 transition stays within [min, max] +- thr and matches the formula
    trans = ~passed & ~hard
    want = u_m[trans] + thr[trans] * filter_f2((u_h[trans] - u_m[trans]) / thr[trans])
    assert np.allclose(out2[trans], want, atol=1e-14)


def test_classification_sign_invariance():
    rng = np.random.default_rng(7)
    u_m = rng.uniform(-2, 2, 1000)
    d = rng.uniform(-1, 1, 1000)
    beta = 0.4
    pass_pos = np.abs(d) <= beta * np.abs(u_m)
    pass_neg = np.abs(d) <= beta * np.abs(-u_m)
    assert np.array_equal(pass_pos, pass_neg)


def test_pass_set_grows_with_beta(disc):
    rng = np.random.default_rng(3)
    shape = (1, disc.mesh.n_cells, disc.n1d, disc.n1d)
    u_h = NodalField(disc, rng.uniform(0.5, 2.0, shape), ("u",))
    u_m = NodalField(disc, rng.uniform(0.5, 2.0, shape), ("u",))
    small = FilterConfig(function="f1", mode="relative", betas={"u": 0.2})
    big = FilterConfig(function="f1", mode="relative", betas={"u": 0.8})
    out_s = apply_relative(u_h, u_m, small, "u").data
    out_b = apply_relative(u_h, u_m, big, "u").data
    passed_small = out_s == u_h.data
    passed_big = out_b == u_h.data
    assert np.all(passed_big[passed_small])


def test_apply_filter_euler_momentum_shares_beta():
    mesh = dgf.build_uniform(2, 2, (0, 1, 0, 1))
    disc = Discretization(mesh, 1)
    names = ("rho", "mom_x", "mom_y", "energy")
    shape = (4, mesh.n_cells, 2, 2)
    u_m = NodalField(disc, np.ones(shape), names)
    u_h = NodalField(disc, np.ones(shape) * 1.2, names)
    cfg = FilterConfig(function="f1", mode="relative",
                       betas={"rho": 0.1, "mom_x": 0.5, "mom_y": 0.5, "energy": 0.1})
    out = apply_filter(u_h, u_m, 0.1, cfg)
    assert np.all(out.data[0] == 1.0)   # rho cut
    assert np.all(out.data[3] == 1.0)   # energy cut
    assert np.all(out.data[1] == 1.2)   # momentum passes (acoustic gauge > |m|)
    assert np.all(out.data[2] == 1.2)


def test_increment_gauge_needs_reference(disc):
    cfg = FilterConfig(function="f1", mode="relative", betas={"u": 0.4}, gauge="increment")
    with pytest.raises(ValueError):
        apply_relative(_field(disc, 1.0), _field(disc, 1.0), cfg, "u")


def test_increment_gauge_thresholds_on_low_order_motion(disc):
    cfg = FilterConfig(function="f1", mode="relative", betas={"u": 1.0},
                       gauge="increment", denominator_floor=1e-12)
    ref = _field(disc, 1.0)
    u_m = _field(disc, 1.1)     # low-order moved by 0.1
    u_h = _field(disc, 1.15)    # within 1.0 * 0.1 of the low-order result
    out = apply_relative(u_h, u_m, cfg, "u", reference=ref.data[0])
    assert np.all(out.data == 1.15)
    u_h2 = _field(disc, 1.35)   # farther than the gauge: cut
    out2 = apply_relative(u_h2, u_m, cfg, "u", reference=ref.data[0])
    assert np.all(out2.data == 1.1)
