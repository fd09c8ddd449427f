import numpy as np
import pytest

import dgfilter as dgf
from dgfilter.amr import AdaptPolicy, adapt, compute_indicator, mark_cells, transfer_nodal_data
from dgfilter.dg import Discretization, NodalField
from dgfilter.mesh import coarsen_with_transfer, refine_with_transfer
from dgfilter.models import solid_body_rotation_ic


def test_policy_validation():
    with pytest.raises(ValueError):
        AdaptPolicy(refine_fraction=0.0)
    with pytest.raises(ValueError):
        AdaptPolicy(coarsen_fraction=0.5, refine_fraction=0.2)
    with pytest.raises(ValueError):
        AdaptPolicy(interval=0)


def test_indicator_zero_on_constant():
    mesh = dgf.build_uniform(4, 4, (0, 1, 0, 1))
    disc = Discretization(mesh, 1)
    f = NodalField.from_function(disc, lambda x, y: np.ones_like(x)[None], names=("u",))
    assert compute_indicator(f, "u").max() == 0.0


def test_indicator_of_linear_field():
    mesh = dgf.build_uniform(1, 1, (0, 1, 0, 1))
    disc = Discretization(mesh, 1)
    f = NodalField.from_function(disc, lambda x, y: (3.0 * x)[None], names=("u",))
    assert compute_indicator(f, "u")[0] == pytest.approx(3.0, abs=1e-12)


def test_indicator_uses_named_variable():
    mesh = dgf.build_uniform(2, 2, (0, 1, 0, 1))
    disc = Discretization(mesh, 1)
    names = ("rho", "mom_x", "mom_y", "energy")
    data = np.ones((4, mesh.n_cells, 2, 2))
    data[0] = disc.node_x  # gradient only in the density
    f = NodalField(disc, data, names)
    eta = compute_indicator(f, "rho")
    assert eta.min() > 0.9
    assert compute_indicator(f, "energy").max() == 0.0


def test_indicator_scale_monotone():
    mesh = dgf.build_uniform(4, 4, (-0.5, 0.5, -0.5, 0.5))
    disc = Discretization(mesh, 1)
    f = NodalField.from_function(disc, solid_body_rotation_ic, names=("u",))
    eta = compute_indicator(f, "u")
    eta2 = compute_indicator(f.with_data(2.0 * f.data), "u")
    assert np.allclose(eta2, 2.0 * eta)
    pol = AdaptPolicy(max_level=2)
    r1, c1 = mark_cells(eta, pol, mesh)
    r2, c2 = mark_cells(eta2, pol, mesh)
    assert np.array_equal(r1, r2) and np.array_equal(c1, c2)


def test_adapt_identity_on_constant():
    mesh = dgf.build_uniform(4, 4, (0, 1, 0, 1), max_level=2)
    disc = Discretization(mesh, 1)
    f = NodalField.from_function(disc, lambda x, y: np.ones_like(x)[None], names=("u",))
    g = adapt(f, AdaptPolicy(max_level=2))
    assert g is f


def test_adapt_refines_discontinuity_and_validates():
    mesh = dgf.build_uniform(10, 10, (-0.5, 0.5, -0.5, 0.5), max_level=2)
    disc = Discretization(mesh, 1)
    f = NodalField.from_function(disc, solid_body_rotation_ic, names=("u",))
    g = adapt(f, AdaptPolicy(max_level=2))
    assert g.disc.mesh.n_cells > mesh.n_cells
    g.disc.mesh.validate()


@pytest.mark.parametrize("k", [1, 2, 3])
def test_refine_transfer_exact_on_polynomials(k):
    mesh = dgf.build_uniform(3, 3, (0, 1, 0, 1), max_level=2)
    disc = Discretization(mesh, k)

    def poly(x, y):
        out = 2.0 + 0.3 * x + 0.7 * y + x * y
        if k >= 2:
            out = out + 0.2 * x ** 2 * y ** 2
        return out[None]

    f = NodalField.from_function(disc, poly, names=("u",))
    mesh2, transfers = refine_with_transfer(mesh, [0, 4, 8])
    data = f.data
    for tr in transfers:
        data = transfer_nodal_data(data, tr, disc.line)
    disc2 = Discretization(mesh2, k)
    exact = poly(disc2.node_x, disc2.node_y)
    assert np.abs(data - exact).max() < 1e-13


def test_transfer_conserves_integrals():
    rng = np.random.default_rng(7)
    mesh = dgf.build_uniform(4, 4, (0, 2, 0, 2), max_level=2)
    disc = Discretization(mesh, 2)
    f = NodalField(disc, rng.normal(size=(2, mesh.n_cells, 3, 3)), ("a", "b"))
    tot = f.integral()

    mesh2, transfers = refine_with_transfer(mesh, [3, 7, 12])
    data = f.data
    for tr in transfers:
        data = transfer_nodal_data(data, tr, disc.line)
    disc2 = Discretization(mesh2, 2)
    assert np.allclose(NodalField(disc2, data, f.names).integral(), tot, rtol=1e-12)

    kids = np.nonzero(mesh2.level == 1)[0]
    mesh3, tr3 = coarsen_with_transfer(mesh2, kids)
    data3 = transfer_nodal_data(data, tr3, disc.line)
    disc3 = Discretization(mesh3, 2)
    assert np.allclose(NodalField(disc3, data3, f.names).integral(), tot, rtol=1e-12)


def test_refine_then_coarsen_identity():
    rng = np.random.default_rng(9)
    mesh = dgf.build_uniform(3, 3, (0, 1, 0, 1), max_level=2)
    disc = Discretization(mesh, 2)
    f = NodalField(disc, rng.normal(size=(1, 9, 3, 3)), ("u",))
    mesh2, transfers = refine_with_transfer(mesh, [4])
    data = transfer_nodal_data(f.data, transfers[0], disc.line)
    mesh3, tr3 = coarsen_with_transfer(mesh2, np.nonzero(mesh2.level == 1)[0])
    data3 = transfer_nodal_data(data, tr3, disc.line)
    assert mesh3.n_cells == mesh.n_cells
    order0 = np.lexsort((mesh.ix, mesh.iy))
    order3 = np.lexsort((mesh3.ix, mesh3.iy))
    assert np.abs(data3[:, order3] - f.data[:, order0]).max() < 1e-12


def test_indicator_requires_degree_one():
    mesh = dgf.build_uniform(2, 2, (0, 1, 0, 1))
    with pytest.raises(ValueError):
        Discretization(mesh, 0)


def test_adapt_skips_periodic_mesh():
    mesh = dgf.build_uniform(4, 4, (0, 1, 0, 1), periodic_x=True, periodic_y=True)
    disc = Discretization(mesh, 1)
    f = NodalField.from_function(disc, lambda x, y: np.sin(2 * np.pi * x)[None], names=("u",))
    assert adapt(f, AdaptPolicy(max_level=2)) is f
