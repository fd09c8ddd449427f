"""Collocation DG spatial operator on quadtree meshes.

The discretization is nodal: degrees of freedom are point values at the
tensor-product Gauss-Lobatto nodes of each cell, quadrature is collocated at
the same points (diagonal mass matrix), and inter-cell coupling goes through
a Rusanov numerical flux on faces. On a hanging face the fine cell
integrates its own edge quadrature and the coarse side accumulates the two
sub-face integrals, with coarse traces interpolated to the fine points; this
keeps the scheme conservative on nonconforming meshes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import basis as basis_mod
from .boundary import apply_boundary
from .errors import StateError
from .mesh import QuadMesh


@dataclass
class _ConfGroup:
    axis: int
    left: np.ndarray
    right: np.ndarray
    coef_l: np.ndarray  # (nf, 1) mass-scaled edge factors
    coef_r: np.ndarray
    xq: np.ndarray      # (nf, n) face quadrature point coords
    yq: np.ndarray


@dataclass
class _HangGroup:
    axis: int
    coarse_left: bool
    sub: int
    coarse: np.ndarray
    fine: np.ndarray
    trace: np.ndarray    # (n, n): coarse edge values -> values at fine points
    scatter: np.ndarray  # (n, n): fine-point flux -> coarse edge moments
    coef_fine: np.ndarray
    coef_coarse: np.ndarray
    xq: np.ndarray
    yq: np.ndarray


@dataclass
class _BndGroup:
    side: str
    axis: int
    is_min: bool
    cells: np.ndarray
    coef: np.ndarray
    xq: np.ndarray
    yq: np.ndarray


class Discretization:
    """A mesh paired with a nodal tensor basis, plus cached assembly arrays."""

    def __init__(self, mesh: QuadMesh, degree: int):
        if degree < 1:
            raise ValueError("DG discretization needs polynomial degree >= 1")
        self.mesh = mesh
        self.degree = degree
        self.line = basis_mod.lobatto_basis(degree)
        self.n1d = degree + 1

        xi = self.line.nodes
        w = self.line.weights
        self.w2 = np.outer(w, w)
        shape = (mesh.n_cells, self.n1d, self.n1d)
        self.node_x = np.broadcast_to(
            mesh.cx[:, None, None] + 0.5 * mesh.hx[:, None, None] * xi[None, :, None], shape
        ).copy()
        self.node_y = np.broadcast_to(
            mesh.cy[:, None, None] + 0.5 * mesh.hy[:, None, None] * xi[None, None, :], shape
        ).copy()

        d = self.line.diff
        # weak-form derivative: (Qw f)[a] = sum_c w_c D[c,a] f_c / w_a
        self.weak_diff = (d * w[:, None]).T / w[:, None]
        self.inv_hx = 2.0 / mesh.hx
        self.inv_hy = 2.0 / mesh.hy

        self._edge_w = w[0]  # == w[-1] by symmetry
        p_lo, p_hi = basis_mod.half_interp_matrices(self.line)
        self._trace_half = (p_lo, p_hi)
        self._build_groups()

    # ------------------------------------------------------------------
    def _face_coords(self, axis, cells, offset_sign):
        xi = self.line.nodes
        m = self.mesh
        if axis == 0:
            x = (m.cx[cells] + 0.5 * offset_sign * m.hx[cells])[:, None] * np.ones_like(xi)[None, :]
            y = m.cy[cells][:, None] + 0.5 * m.hy[cells][:, None] * xi[None, :]
        else:
            x = m.cx[cells][:, None] + 0.5 * m.hx[cells][:, None] * xi[None, :]
            y = (m.cy[cells] + 0.5 * offset_sign * m.hy[cells])[:, None] * np.ones_like(xi)[None, :]
        return x, y

    def _edge_coef(self, axis, cells):
        h = self.mesh.hx if axis == 0 else self.mesh.hy
        return (2.0 / (h[cells] * self._edge_w))[:, None]

    def _build_groups(self):
        m = self.mesh
        w = self.line.weights
        p_lo, p_hi = self._trace_half
        scat = []
        for p in (p_lo, p_hi):
            scat.append((p.T * w[None, :]) / w[:, None])

        self.conf_groups = []
        for axis, grp in ((0, m.faces.conf_x), (1, m.faces.conf_y)):
            xq, yq = self._face_coords(axis, grp.left, +1.0)
            self.conf_groups.append(
                _ConfGroup(axis, grp.left, grp.right,
                           self._edge_coef(axis, grp.left),
                           self._edge_coef(axis, grp.right), xq, yq)
            )

        self.hang_groups = []
        for axis, grp in ((0, m.faces.hang_x), (1, m.faces.hang_y)):
            for coarse_left in (True, False):
                for sub in (0, 1):
                    sel = (grp.coarse_left == coarse_left) & (grp.sub == sub)
                    if not np.any(sel):
                        continue
                    coarse = grp.coarse[sel]
                    fine = grp.fine[sel]
                    xq, yq = self._face_coords(axis, fine, -1.0 if coarse_left else 1.0)
                    h = m.hx if axis == 0 else m.hy
                    coef_coarse = (1.0 / (h[coarse] * self._edge_w))[:, None]
                    self.hang_groups.append(
                        _HangGroup(axis, coarse_left, sub, coarse, fine,
                                   (p_lo, p_hi)[sub], scat[sub],
                                   self._edge_coef(axis, fine), coef_coarse, xq, yq)
                    )

        self.bnd_groups = []
        for side, axis, is_min in (
            ("xmin", 0, True), ("xmax", 0, False), ("ymin", 1, True), ("ymax", 1, False),
        ):
            grp = m.faces.boundary[side]
            if grp.cells.size == 0:
                continue
            xq, yq = self._face_coords(axis, grp.cells, -1.0 if is_min else 1.0)
            self.bnd_groups.append(
                _BndGroup(side, axis, is_min, grp.cells,
                          self._edge_coef(axis, grp.cells), xq, yq)
            )

    # ------------------------------------------------------------------
    def cell_integrals(self, data: np.ndarray) -> np.ndarray:
        """Integral of each variable over each cell; data is (nv, nc, n, n)."""
        return np.einsum("vcij,ij->vc", data, self.w2) * (0.25 * self.mesh.area)

    def integral(self, data: np.ndarray) -> np.ndarray:
        return self.cell_integrals(data).sum(axis=1)


@dataclass
class NodalField:
    """Per-cell nodal coefficients of one or more conserved variables."""

    disc: Discretization
    data: np.ndarray  # (n_vars, n_cells, k+1, k+1)
    names: tuple[str, ...]

    @classmethod
    def from_function(cls, disc: Discretization, fn, names=None) -> "NodalField":
        vals = np.asarray(fn(disc.node_x, disc.node_y), dtype=float)
        if vals.ndim == 3:
            vals = vals[None]
        names = tuple(names) if names is not None else tuple(f"u{i}" for i in range(vals.shape[0]))
        return cls(disc, np.ascontiguousarray(vals), names)

    def with_data(self, data: np.ndarray) -> "NodalField":
        return NodalField(self.disc, data, self.names)

    def copy(self) -> "NodalField":
        return NodalField(self.disc, self.data.copy(), self.names)

    def var(self, name: str) -> np.ndarray:
        return self.data[self.names.index(name)]

    def integral(self) -> np.ndarray:
        return self.disc.integral(self.data)

    def minmax(self) -> dict[str, tuple[float, float]]:
        return {
            name: (float(self.data[i].min()), float(self.data[i].max()))
            for i, name in enumerate(self.names)
        }


def rusanov_flux(model, w_l, w_r, normal, x=0.0, y=0.0, t=0.0):
    """Rusanov flux for an arbitrary unit normal.

    F = (F(wL) + F(wR)) . n / 2 - lambda (wR - wL) / 2 with lambda the larger
    of the two max wave speeds. Reduces to exact upwinding for linear
    advection.
    """
    w_l = np.asarray(w_l, dtype=float)
    w_r = np.asarray(w_r, dtype=float)
    nx, ny = normal
    fxl, fyl = model.flux(w_l, x, y, t)
    fxr, fyr = model.flux(w_r, x, y, t)
    if hasattr(model, "eos"):
        from .models import max_wave_speed

        lam = np.maximum(
            max_wave_speed(w_l, model.eos, normal), max_wave_speed(w_r, model.eos, normal)
        )
    else:
        ax, ay = model.velocity(x, y, t)
        lam = np.abs(ax * nx + ay * ny)
    return 0.5 * (nx * (fxl + fxr) + ny * (fyl + fyr)) - 0.5 * lam * (w_r - w_l)


def _rusanov_axis(model, w_l, w_r, axis, x, y, t):
    fl = model.flux_axis(w_l, x, y, t, axis)
    fr = model.flux_axis(w_r, x, y, t, axis)
    lam = model.face_speed(w_l, w_r, x, y, t, axis)
    return 0.5 * (fl + fr) - 0.5 * lam * (w_r - w_l)


def _edge_view(data: np.ndarray, axis: int, is_max: bool) -> np.ndarray:
    """View of the nodal values on one edge of every cell: (nv, nc, n).

    Indexing through a basic-slicing view first keeps later fancy indexing
    one-dimensional, so gathers and in-place scatters have the (nv, nf, n)
    layout regardless of the edge orientation.
    """
    if axis == 0:
        return data[:, :, -1, :] if is_max else data[:, :, 0, :]
    return data[:, :, :, -1] if is_max else data[:, :, :, 0]


class DGOperator:
    """High-order stage operator: one forward-Euler substep of the DG scheme."""

    def __init__(self, disc: Discretization, model, bcs: dict):
        self.disc = disc
        self.model = model
        self.bcs = bcs

    def residual(self, data: np.ndarray, t: float) -> np.ndarray:
        """du/dt of the semi-discrete scheme for nodal values ``data``."""
        d = self.disc
        model = self.model
        fx, fy = model.flux(data, d.node_x, d.node_y, t)
        res = np.einsum("ax,vcxb->vcab", d.weak_diff, fx, optimize=True)
        res *= d.inv_hx[None, :, None, None]
        res += np.einsum("by,vcay->vcab", d.weak_diff, fy, optimize=True) \
            * d.inv_hy[None, :, None, None]

        for g in d.conf_groups:
            w_l = _edge_view(data, g.axis, True)[:, g.left]
            w_r = _edge_view(data, g.axis, False)[:, g.right]
            fh = _rusanov_axis(model, w_l, w_r, g.axis, g.xq, g.yq, t)
            _edge_view(res, g.axis, True)[:, g.left] -= g.coef_l * fh
            _edge_view(res, g.axis, False)[:, g.right] += g.coef_r * fh

        for g in d.hang_groups:
            edge = _edge_view(data, g.axis, g.coarse_left)[:, g.coarse]
            fine_tr = _edge_view(data, g.axis, not g.coarse_left)[:, g.fine]
            coarse_tr = np.einsum("qb,vfb->vfq", g.trace, edge)
            if g.coarse_left:
                fh = _rusanov_axis(model, coarse_tr, fine_tr, g.axis, g.xq, g.yq, t)
            else:
                fh = _rusanov_axis(model, fine_tr, coarse_tr, g.axis, g.xq, g.yq, t)
            moments = np.einsum("bq,vfq->vfb", g.scatter, fh)
            sgn_coarse = -1.0 if g.coarse_left else 1.0
            _edge_view(res, g.axis, g.coarse_left)[:, g.coarse] += \
                sgn_coarse * g.coef_coarse * moments
            _edge_view(res, g.axis, not g.coarse_left)[:, g.fine] -= \
                sgn_coarse * g.coef_fine * fh

        for g in d.bnd_groups:
            rule = self.bcs[g.side]
            w_in = _edge_view(data, g.axis, not g.is_min)[:, g.cells]
            n_out = {
                (0, True): (-1.0, 0.0), (0, False): (1.0, 0.0),
                (1, True): (0.0, -1.0), (1, False): (0.0, 1.0),
            }[(g.axis, g.is_min)]
            w_ex = apply_boundary(rule, w_in, g.xq, g.yq, t, n_out[0], n_out[1], model)
            if g.is_min:
                fh = _rusanov_axis(model, w_ex, w_in, g.axis, g.xq, g.yq, t)
                _edge_view(res, g.axis, False)[:, g.cells] += g.coef * fh
            else:
                fh = _rusanov_axis(model, w_in, w_ex, g.axis, g.xq, g.yq, t)
                _edge_view(res, g.axis, True)[:, g.cells] -= g.coef * fh

        return res

    def substep(self, field: NodalField, t: float, dt: float) -> NodalField:
        """u = v + dt R(v); validates the input state for the Euler model."""
        if dt <= 0:
            raise ValueError(f"substep needs dt > 0, got {dt}")
        self.model.validate(field.data, t, cell_of=lambda idx: idx[0])
        return field.with_data(field.data + dt * self.residual(field.data, t))
