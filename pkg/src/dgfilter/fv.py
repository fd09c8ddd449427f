"""Monotone low-order operator: first-order finite volumes on the leaf mesh.

The low-order stage works on cell averages of the current nodal state, takes
one Godunov-type forward-Euler substep with the same Rusanov flux as the DG
operator, and broadcasts the result back to the high-order nodes as a
piecewise-constant field.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import basis as basis_mod
from .boundary import apply_boundary
from .dg import Discretization, NodalField, _edge_view, _rusanov_axis
from .errors import StateError


@dataclass
class CellAverageField:
    """One value per leaf cell per conserved variable; data is (n_vars, n_cells)."""

    disc: Discretization
    data: np.ndarray
    names: tuple[str, ...]

    def with_data(self, data: np.ndarray) -> "CellAverageField":
        return CellAverageField(self.disc, data, self.names)

    def integral(self) -> np.ndarray:
        return (self.data * self.disc.mesh.area[None, :]).sum(axis=1)

    def minmax(self) -> dict[str, tuple[float, float]]:
        return {
            name: (float(self.data[i].min()), float(self.data[i].max()))
            for i, name in enumerate(self.names)
        }


def project_to_averages(field: NodalField) -> CellAverageField:
    """Quadrature mean of each cell; exact for polynomials of degree <= 2k-1."""
    w2 = field.disc.w2
    avg = np.einsum("vcij,ij->vc", field.data, w2) * 0.25
    return CellAverageField(field.disc, avg, field.names)


def broadcast_to_nodes(avg: CellAverageField) -> NodalField:
    """Constant-per-cell nodal field carrying the averages."""
    n = avg.disc.n1d
    data = np.broadcast_to(avg.data[:, :, None, None], avg.data.shape + (n, n)).copy()
    return NodalField(avg.disc, data, avg.names)


def _scatter(acc: np.ndarray, idx: np.ndarray, vals: np.ndarray, sign: float):
    # bincount per variable; idx repeats freely (a cell owns several faces)
    nc = acc.shape[1]
    for v in range(acc.shape[0]):
        acc[v] += sign * np.bincount(idx, weights=vals[v], minlength=nc)


class FVOperator:
    """Low-order stage operator on cell averages."""

    def __init__(self, mesh, model, bcs: dict):
        self.mesh = mesh
        self.model = model
        self.bcs = bcs

    def substep_data(self, data: np.ndarray, t: float, dt: float) -> np.ndarray:
        mesh = self.mesh
        model = self.model
        model.validate(data, t, cell_of=lambda idx: idx[0])
        div = np.zeros_like(data)

        f = mesh.faces
        for axis, grp in ((0, f.conf_x), (1, f.conf_y)):
            if grp.left.size == 0:
                continue
            fh = _rusanov_axis(model, data[:, grp.left], data[:, grp.right],
                               axis, grp.mid_x, grp.mid_y, t)
            fh = fh * grp.length[None, :]
            _scatter(div, grp.left, fh, +1.0)
            _scatter(div, grp.right, fh, -1.0)

        for axis, grp in ((0, f.hang_x), (1, f.hang_y)):
            if grp.fine.size == 0:
                continue
            w_c = data[:, grp.coarse]
            w_f = data[:, grp.fine]
            w_l = np.where(grp.coarse_left[None, :], w_c, w_f)
            w_r = np.where(grp.coarse_left[None, :], w_f, w_c)
            fh = _rusanov_axis(model, w_l, w_r, axis, grp.mid_x, grp.mid_y, t)
            fh = fh * grp.length[None, :]
            left = np.where(grp.coarse_left, grp.coarse, grp.fine)
            right = np.where(grp.coarse_left, grp.fine, grp.coarse)
            _scatter(div, left, fh, +1.0)
            _scatter(div, right, fh, -1.0)

        normals = {"xmin": (0, True), "xmax": (0, False), "ymin": (1, True), "ymax": (1, False)}
        for side, (axis, is_min) in normals.items():
            grp = f.boundary[side]
            if grp.cells.size == 0:
                continue
            w_in = data[:, grp.cells]
            n_out = {
                (0, True): (-1.0, 0.0), (0, False): (1.0, 0.0),
                (1, True): (0.0, -1.0), (1, False): (0.0, 1.0),
            }[(axis, is_min)]
            w_ex = apply_boundary(self.bcs[side], w_in, grp.mid_x, grp.mid_y, t,
                                  n_out[0], n_out[1], model)
            if is_min:
                fh = _rusanov_axis(model, w_ex, w_in, axis, grp.mid_x, grp.mid_y, t)
                _scatter(div, grp.cells, fh * grp.length[None, :], -1.0)
            else:
                fh = _rusanov_axis(model, w_in, w_ex, axis, grp.mid_x, grp.mid_y, t)
                _scatter(div, grp.cells, fh * grp.length[None, :], +1.0)

        out = data - dt * div / mesh.area[None, :]
        try:
            self.model.validate(out, t + dt, cell_of=lambda idx: idx[0])
        except StateError as exc:
            raise StateError(f"low-order update produced an inadmissible state: {exc}",
                             cell=exc.cell, time=t) from exc
        return out

    def substep(self, avg: CellAverageField, t: float, dt: float) -> CellAverageField:
        if dt <= 0:
            raise ValueError(f"substep needs dt > 0, got {dt}")
        return avg.with_data(self.substep_data(avg.data, t, dt))


def _overlap_segments(bounds_c, bounds_f):
    """Overlap intervals of two interval partitions: (i_coarse, i_fine, length).

    Only the common range of the two partitions contributes, so a fine
    partition covering half of the coarse one yields segments for that half.
    """
    lo_lim = max(bounds_c[0], bounds_f[0])
    hi_lim = min(bounds_c[-1], bounds_f[-1])
    cuts = np.unique(np.concatenate([bounds_c, bounds_f]))
    cuts = cuts[(cuts >= lo_lim - 1e-12) & (cuts <= hi_lim + 1e-12)]
    cuts = cuts[np.concatenate([[True], np.diff(cuts) > 1e-12])]
    segs = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        mid = 0.5 * (lo + hi)
        ic = min(int(np.searchsorted(bounds_c, mid) - 1), len(bounds_c) - 2)
        jf = min(int(np.searchsorted(bounds_f, mid) - 1), len(bounds_f) - 2)
        segs.append((ic, jf, float(hi - lo)))
    return segs


class SubcellFVOperator:
    """Monotone first-order update on the nodal subcell tiling.

    Every node owns the subcell spanned by its Gauss-Lobatto weights; the two
    coincident nodes on a conforming face share one merged control volume, so
    the update is consistent at every node. The tiling carries the quadrature
    measure of the DG scheme, making the update conservative for the exact DG
    cell integrals, including across hanging faces (overlap splitting). Its
    distance from the input state vanishes with dt.
    """

    def __init__(self, disc: Discretization, model, bcs: dict):
        self.disc = disc
        self.model = model
        self.bcs = bcs
        w = disc.line.weights
        self.n1d = disc.n1d
        self.frac = 0.5 * w  # subcell width as a fraction of the cell edge
        self.inner = -1.0 + np.cumsum(w)[:-1]  # interior subcell boundaries, ref coords
        unit_c = np.concatenate([[0.0], 0.5 * np.cumsum(w)])
        self._hang_segs = {}
        for sub in (0, 1):
            self._hang_segs[sub] = _overlap_segments(unit_c, 0.5 * sub + 0.5 * unit_c)

    def substep_data(self, data: np.ndarray, t: float, dt: float) -> np.ndarray:
        d = self.disc
        mesh = d.mesh
        model = self.model
        model.validate(data, t, cell_of=lambda idx: idx[0])
        div = np.zeros_like(data)
        nodes = d.line.nodes
        n = self.n1d

        # faces between subcells of the same cell
        shape_x = (mesh.n_cells, n - 1, n)
        xq = np.broadcast_to(
            mesh.cx[:, None, None] + 0.5 * mesh.hx[:, None, None] * self.inner[None, :, None],
            shape_x)
        yq = np.broadcast_to(
            mesh.cy[:, None, None] + 0.5 * mesh.hy[:, None, None] * nodes[None, None, :],
            shape_x)
        fx = _rusanov_axis(model, data[:, :, :-1, :], data[:, :, 1:, :], 0, xq, yq, t)
        fx = fx * (self.frac[None, None, None, :] * mesh.hy[None, :, None, None])
        div[:, :, :-1, :] += fx
        div[:, :, 1:, :] -= fx

        shape_y = (mesh.n_cells, n, n - 1)
        xq = np.broadcast_to(
            mesh.cx[:, None, None] + 0.5 * mesh.hx[:, None, None] * nodes[None, :, None],
            shape_y)
        yq = np.broadcast_to(
            mesh.cy[:, None, None] + 0.5 * mesh.hy[:, None, None] * self.inner[None, None, :],
            shape_y)
        fy = _rusanov_axis(model, data[:, :, :, :-1], data[:, :, :, 1:], 1, xq, yq, t)
        fy = fy * (self.frac[None, None, :, None] * mesh.hx[None, :, None, None])
        div[:, :, :, :-1] += fy
        div[:, :, :, 1:] -= fy

        # conforming cell interfaces: edge subcells pair one to one
        for g in d.conf_groups:
            w_l = _edge_view(data, g.axis, True)[:, g.left]
            w_r = _edge_view(data, g.axis, False)[:, g.right]
            fh = _rusanov_axis(model, w_l, w_r, g.axis, g.xq, g.yq, t)
            h_t = (mesh.hy if g.axis == 0 else mesh.hx)[g.left]
            seg = fh * (self.frac[None, None, :] * h_t[None, :, None])
            _edge_view(div, g.axis, True)[:, g.left] += seg
            _edge_view(div, g.axis, False)[:, g.right] -= seg

        # hanging interfaces: exact overlaps of coarse and fine edge subcells
        for g in d.hang_groups:
            segs = self._hang_segs[g.sub]
            edge_c = _edge_view(data, g.axis, g.coarse_left)[:, g.coarse]
            edge_f = _edge_view(data, g.axis, not g.coarse_left)[:, g.fine]
            h_c = (mesh.hy if g.axis == 0 else mesh.hx)[g.coarse]
            div_c = _edge_view(div, g.axis, g.coarse_left)
            div_f = _edge_view(div, g.axis, not g.coarse_left)
            sgn = 1.0 if g.coarse_left else -1.0
            for ic, jf, seg_len in segs:
                xm = g.xq[:, jf]
                ym = g.yq[:, jf]
                if g.coarse_left:
                    fh = _rusanov_axis(model, edge_c[:, :, ic], edge_f[:, :, jf],
                                       g.axis, xm, ym, t)
                else:
                    fh = _rusanov_axis(model, edge_f[:, :, jf], edge_c[:, :, ic],
                                       g.axis, xm, ym, t)
                seg = fh * (seg_len * h_c)[None, :]
                div_c[:, g.coarse, ic] += sgn * seg
                div_f[:, g.fine, jf] -= sgn * seg

        # boundary subcell faces
        for g in d.bnd_groups:
            rule = self.bcs[g.side]
            w_in = _edge_view(data, g.axis, not g.is_min)[:, g.cells]
            n_out = {
                (0, True): (-1.0, 0.0), (0, False): (1.0, 0.0),
                (1, True): (0.0, -1.0), (1, False): (0.0, 1.0),
            }[(g.axis, g.is_min)]
            w_ex = apply_boundary(rule, w_in, g.xq, g.yq, t, n_out[0], n_out[1], model)
            h_t = (mesh.hy if g.axis == 0 else mesh.hx)[g.cells]
            seg_w = self.frac[None, None, :] * h_t[None, :, None]
            if g.is_min:
                fh = _rusanov_axis(model, w_ex, w_in, g.axis, g.xq, g.yq, t)
                _edge_view(div, g.axis, False)[:, g.cells] -= fh * seg_w
            else:
                fh = _rusanov_axis(model, w_in, w_ex, g.axis, g.xq, g.yq, t)
                _edge_view(div, g.axis, True)[:, g.cells] += fh * seg_w

        area = (mesh.area[None, :, None, None]
                * self.frac[None, None, :, None] * self.frac[None, None, None, :])
        out = data - dt * div / area
        try:
            model.validate(out, t + dt, cell_of=lambda idx: idx[0])
        except StateError as exc:
            raise StateError(
                f"subcell low-order update produced an inadmissible state: {exc}",
                cell=exc.cell, time=t) from exc
        return out
