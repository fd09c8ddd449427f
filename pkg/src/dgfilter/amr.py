"""Gradient-driven mesh adaptation with conservative solution transfer.

Cells are marked relative to the instantaneous maximum of a per-cell
indicator (the largest nodal gradient magnitude of a chosen variable).
Refinement transfers the solution by polynomial interpolation at the child
nodes, which is exact for the cell polynomial; coarsening projects the four
children onto the parent polynomial space, which preserves cell integrals
and inverts refinement exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import basis as basis_mod
from . import mesh as mesh_mod
from .dg import Discretization, NodalField


@dataclass(frozen=True)
class AdaptPolicy:
    """Marking thresholds (fractions of the max indicator) and cadence."""

    refine_fraction: float = 0.2
    coarsen_fraction: float = 0.05
    max_level: int = 2
    interval: int = 5
    initial_cycles: int = 3

    def __post_init__(self):
        if not 0.0 < self.refine_fraction < 1.0:
            raise ValueError("refine_fraction must lie in (0, 1)")
        if not 0.0 < self.coarsen_fraction < self.refine_fraction:
            raise ValueError("coarsen_fraction must lie in (0, refine_fraction)")
        if self.interval < 1:
            raise ValueError("adapt interval must be >= 1")
        if self.max_level < 0:
            raise ValueError("max_level must be >= 0")


def compute_indicator(field: NodalField, variable: str = "u") -> np.ndarray:
    """Per-cell max nodal gradient magnitude of one variable.

    Uses the strong differentiation matrix scaled by the inverse cell
    extents; needs degree >= 1.
    """
    disc = field.disc
    if disc.degree < 1:
        raise ValueError("gradient indicator needs polynomial degree >= 1")
    u = field.var(variable)
    d = disc.line.diff
    ux = np.einsum("ax,cxb->cab", d, u) * disc.inv_hx[:, None, None]
    uy = np.einsum("by,cay->cab", d, u) * disc.inv_hy[:, None, None]
    mag = np.hypot(ux, uy)
    return mag.max(axis=(1, 2))


def mark_cells(eta: np.ndarray, policy: AdaptPolicy, mesh) -> tuple[np.ndarray, np.ndarray]:
    """(refine ids, coarsen ids) from indicator values, relative to max eta."""
    top = float(eta.max(initial=0.0))
    if top == 0.0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    refine = np.nonzero((eta > policy.refine_fraction * top) & (mesh.level < policy.max_level))[0]
    coarsen = np.nonzero((eta < policy.coarsen_fraction * top) & (mesh.level >= 1))[0]
    return refine, coarsen


def transfer_nodal_data(data: np.ndarray, transfer: mesh_mod.MeshTransfer,
                        line: basis_mod.LobattoBasis1D) -> np.ndarray:
    """Move (nv, nc_old, n, n) nodal data through one mesh transfer."""
    n = line.degree + 1
    out = np.zeros((data.shape[0], transfer.n_new, n, n))
    out[:, transfer.kept_new] = data[:, transfer.kept_old]

    if transfer.child_new.size:
        p_lo, p_hi = basis_mod.half_interp_matrices(line)
        interp = (p_lo, p_hi)
        for qx in (0, 1):
            for qy in (0, 1):
                sel = (transfer.child_qx == qx) & (transfer.child_qy == qy)
                if not np.any(sel):
                    continue
                parents = data[:, transfer.child_old[sel]]
                vals = np.einsum("ia,jb,vcab->vcij", interp[qx], interp[qy], parents,
                                 optimize=True)
                out[:, transfer.child_new[sel]] = vals

    if transfer.parent_new.size:
        r_lo, r_hi = basis_mod.half_restriction_matrices(line)
        restrict = (r_lo, r_hi)
        acc = np.zeros((data.shape[0], transfer.parent_new.size, n, n))
        for q in range(4):
            qx, qy = q % 2, q // 2
            kids = data[:, transfer.parent_children_old[:, q]]
            acc += np.einsum("ai,bj,vcij->vcab", restrict[qx], restrict[qy], kids,
                             optimize=True)
        out[:, transfer.parent_new] = acc
    return out


def adapt(field: NodalField, policy: AdaptPolicy, eta: np.ndarray | None = None,
          variable: str | None = None) -> NodalField:
    """One adapt cycle: mark, refine with closure, coarsen, transfer.

    Returns the field on the new discretization (the same object when
    nothing changed). Meshes with periodic sides are left untouched.
    """
    disc = field.disc
    mesh = disc.mesh
    if mesh.periodic_x or mesh.periodic_y:
        return field
    if eta is None:
        variable = variable or _default_indicator_variable(field)
        eta = compute_indicator(field, variable)
    refine_ids, coarsen_ids = mark_cells(eta, policy, mesh)
    if refine_ids.size == 0 and coarsen_ids.size == 0:
        return field

    data = field.data
    current = mesh
    if refine_ids.size:
        current, transfers = mesh_mod.refine_with_transfer(mesh, refine_ids)
        for tr in transfers:
            data = transfer_nodal_data(data, tr, disc.line)
            if coarsen_ids.size:
                keep_map = np.full(tr.n_old, -1, dtype=np.int64)
                keep_map[tr.kept_old] = tr.kept_new
                coarsen_ids = keep_map[coarsen_ids]
                coarsen_ids = coarsen_ids[coarsen_ids >= 0]

    if coarsen_ids.size:
        current, tr = mesh_mod.coarsen_with_transfer(current, coarsen_ids)
        data = transfer_nodal_data(data, tr, disc.line)

    if current is mesh:
        return field
    new_disc = Discretization(current, disc.degree)
    return NodalField(new_disc, data, field.names)


def _default_indicator_variable(field: NodalField) -> str:
    return "rho" if "rho" in field.names else field.names[0]
