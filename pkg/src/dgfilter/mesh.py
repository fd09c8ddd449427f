"""Quadtree meshes of axis-aligned rectangular cells.

A mesh is the set of leaves of a quadtree rooted on an nx-by-ny Cartesian
grid over a rectangle. Leaves are kept 2:1 balanced across faces, so every
face is either conforming (two same-level cells) or a hanging sub-face
pairing one coarse cell with one of the two fine cells that subdivide its
edge. Face connectivity is rebuilt from scratch after every adaptation,
entirely with vectorized integer-key lookups, which keeps remeshing cheap
enough to run every few time steps.

Cell layout convention: a leaf at refinement ``level`` has integer coords
(ix, iy) with 0 <= ix < nx * 2**level, and covers the rectangle of size
(Lx / (nx 2**level)) x (Ly / (ny 2**level)) at that position. Leaves are
stored sorted by their position at the finest representable resolution,
which makes every derived array deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MeshError

# packing of (level, iy, ix) into one int64 key for neighbor lookups
_COORD_BITS = 28
_LEVEL_SHIFT = 2 * _COORD_BITS

BOUNDARY_SIDES = ("xmin", "xmax", "ymin", "ymax")


def _encode(level, ix, iy):
    return (
        (np.asarray(level, dtype=np.int64) << _LEVEL_SHIFT)
        | (np.asarray(iy, dtype=np.int64) << _COORD_BITS)
        | np.asarray(ix, dtype=np.int64)
    )


@dataclass
class ConformingFaces:
    """Same-level interior faces with canonical normal +x or +y (L to R)."""

    left: np.ndarray
    right: np.ndarray
    length: np.ndarray
    mid_x: np.ndarray
    mid_y: np.ndarray


@dataclass
class HangingFaces:
    """Sub-faces of a nonconforming coarse/fine pairing.

    ``sub`` is 0 for the half of the coarse edge nearer the axis origin and
    1 for the far half; ``coarse_left`` tells which side of the canonical
    normal the coarse cell sits on. Geometry follows the fine cell.
    """

    coarse: np.ndarray
    fine: np.ndarray
    sub: np.ndarray
    coarse_left: np.ndarray
    length: np.ndarray
    mid_x: np.ndarray
    mid_y: np.ndarray


@dataclass
class BoundaryFaces:
    cells: np.ndarray
    length: np.ndarray
    mid_x: np.ndarray
    mid_y: np.ndarray


@dataclass
class FaceSet:
    conf_x: ConformingFaces
    conf_y: ConformingFaces
    hang_x: HangingFaces
    hang_y: HangingFaces
    boundary: dict[str, BoundaryFaces] = field(default_factory=dict)

    @property
    def n_faces(self) -> int:
        n = self.conf_x.left.size + self.conf_y.left.size
        n += self.hang_x.fine.size + self.hang_y.fine.size
        n += sum(g.cells.size for g in self.boundary.values())
        return n


@dataclass(frozen=True)
class Face:
    """Flat face record, mainly for inspection and tests."""

    kind: str  # "interior" | "boundary"
    left: int
    right: int | None
    normal: tuple[float, float]  # canonical, pointing from left owner outward
    length: float
    sub: int | None = None


class QuadMesh:
    def __init__(
        self,
        domain,
        nx,
        ny,
        level,
        ix,
        iy,
        *,
        periodic_x=False,
        periodic_y=False,
        max_level=8,
    ):
        x0, x1, y0, y1 = (float(v) for v in domain)
        if not (x1 > x0 and y1 > y0):
            raise MeshError(f"invalid domain rectangle {domain!r}")
        if nx < 1 or ny < 1:
            raise MeshError(f"root grid must be at least 1x1, got {nx}x{ny}")
        self.domain = (x0, x1, y0, y1)
        self.nx = int(nx)
        self.ny = int(ny)
        self.periodic_x = bool(periodic_x)
        self.periodic_y = bool(periodic_y)
        self.max_level = int(max_level)

        level = np.asarray(level, dtype=np.int64)
        ix = np.asarray(ix, dtype=np.int64)
        iy = np.asarray(iy, dtype=np.int64)
        order = self._canonical_order(level, ix, iy)
        self.level = level[order]
        self.ix = ix[order]
        self.iy = iy[order]
        self._sort_perm = order

        lx, ly = x1 - x0, y1 - y0
        scale = np.exp2(-self.level.astype(float))
        self.hx = (lx / self.nx) * scale
        self.hy = (ly / self.ny) * scale
        self.cx = x0 + (self.ix + 0.5) * self.hx
        self.cy = y0 + (self.iy + 0.5) * self.hy
        self.area = self.hx * self.hy
        self.diam = np.hypot(self.hx, self.hy)

        self._keys = _encode(self.level, self.ix, self.iy)
        self._sorted_keys = np.sort(self._keys)
        self._key_order = np.argsort(self._keys)
        self.faces = self._build_faces()

    # ------------------------------------------------------------------
    @property
    def n_cells(self) -> int:
        return self.level.size

    @staticmethod
    def _canonical_order(level, ix, iy):
        shift = _COORD_BITS - 4  # room above any realistic level
        gx = ix << (shift - level)
        gy = iy << (shift - level)
        return np.lexsort((gx, gy))

    def lookup(self, level, ix, iy) -> np.ndarray:
        """Leaf index for each (level, ix, iy) query, or -1 when absent."""
        q = _encode(level, ix, iy)
        pos = np.searchsorted(self._sorted_keys, q)
        pos_c = np.minimum(pos, self._sorted_keys.size - 1)
        found = self._sorted_keys[pos_c] == q
        out = np.where(found, self._key_order[pos_c], -1)
        return out

    # ------------------------------------------------------------------
    def _build_faces(self) -> FaceSet:
        groups = {}
        bnd = {}
        for axis in (0, 1):
            conf, hang, lo, hi = self._scan_axis(axis)
            groups[axis] = (conf, hang)
            bnd["xmin" if axis == 0 else "ymin"] = lo
            bnd["xmax" if axis == 0 else "ymax"] = hi
        return FaceSet(
            conf_x=groups[0][0],
            conf_y=groups[1][0],
            hang_x=groups[0][1],
            hang_y=groups[1][1],
            boundary=bnd,
        )

    def _scan_axis(self, axis):
        """Collect all faces whose normal is the given axis."""
        lev = self.level
        ia = self.ix if axis == 0 else self.iy  # coordinate along the normal
        it = self.iy if axis == 0 else self.ix  # coordinate along the face
        roots = self.nx if axis == 0 else self.ny
        per = self.periodic_x if axis == 0 else self.periodic_y
        n_side = roots << lev
        ids = np.arange(self.n_cells)

        def q(level, a, t):
            if axis == 0:
                return self.lookup(level, a, t)
            return self.lookup(level, t, a)

        # --- plus direction: conforming faces, fine-left hanging, max boundary
        at_hi = ia + 1 == n_side
        wrap = at_hi & per
        inter = ~at_hi
        tgt = np.where(wrap, 0, ia + 1)
        probe = inter | wrap
        same = np.where(probe, q(lev, tgt, it), -1)
        conf_mask = same >= 0
        cL = ids[conf_mask]
        cR = same[conf_mask]

        rest = probe & ~conf_mask & (lev > 0)
        coarse_hi = np.where(rest, q(lev - 1, tgt >> 1, it >> 1), -1)
        hi_mask = coarse_hi >= 0
        hang_fine_l = ids[hi_mask]  # fine cell on the left of the face
        hang_coarse_r = coarse_hi[hi_mask]
        hang_sub_r = (it[hi_mask] & 1).astype(np.int64)

        bnd_hi = ids[at_hi] if not per else np.empty(0, dtype=np.int64)

        # --- minus direction: fine-right hanging, min boundary
        at_lo = ia == 0
        rest_lo = ~at_lo & (lev > 0)
        same_lo = np.where(~at_lo, q(lev, ia - 1, it), -1)
        coarse_lo = np.where(rest_lo & (same_lo < 0), q(lev - 1, (ia - 1) >> 1, it >> 1), -1)
        lo_mask = coarse_lo >= 0
        hang_fine_r = ids[lo_mask]
        hang_coarse_l = coarse_lo[lo_mask]
        hang_sub_l = (it[lo_mask] & 1).astype(np.int64)

        bnd_lo = ids[at_lo] if not per else np.empty(0, dtype=np.int64)

        conf = self._conf_geometry(axis, cL, cR)
        hang = self._hang_geometry(
            axis,
            np.concatenate([hang_coarse_r, hang_coarse_l]),
            np.concatenate([hang_fine_l, hang_fine_r]),
            np.concatenate([hang_sub_r, hang_sub_l]),
            np.concatenate(
                [np.zeros(hang_fine_l.size, bool), np.ones(hang_fine_r.size, bool)]
            ),
        )
        lo = self._bnd_geometry(axis, bnd_lo, is_min=True)
        hi = self._bnd_geometry(axis, bnd_hi, is_min=False)
        return conf, hang, lo, hi

    def _conf_geometry(self, axis, cL, cR):
        if axis == 0:
            length = self.hy[cL]
            mid_x = self.cx[cL] + 0.5 * self.hx[cL]
            mid_y = self.cy[cL]
        else:
            length = self.hx[cL]
            mid_x = self.cx[cL]
            mid_y = self.cy[cL] + 0.5 * self.hy[cL]
        return ConformingFaces(cL, cR, length, mid_x, mid_y)

    def _hang_geometry(self, axis, coarse, fine, sub, coarse_left):
        # geometry always follows the fine cell; the sub-face is its full edge
        sgn = np.where(coarse_left, -1.0, 1.0)  # fine cell sits on +side when coarse left
        if axis == 0:
            length = self.hy[fine]
            mid_x = self.cx[fine] + 0.5 * sgn * self.hx[fine]
            mid_y = self.cy[fine]
        else:
            length = self.hx[fine]
            mid_x = self.cx[fine]
            mid_y = self.cy[fine] + 0.5 * sgn * self.hy[fine]
        return HangingFaces(coarse, fine, sub, coarse_left, length, mid_x, mid_y)

    def _bnd_geometry(self, axis, cells, is_min):
        sgn = -1.0 if is_min else 1.0
        if axis == 0:
            length = self.hy[cells]
            mid_x = self.cx[cells] + 0.5 * sgn * self.hx[cells]
            mid_y = self.cy[cells]
        else:
            length = self.hx[cells]
            mid_x = self.cx[cells]
            mid_y = self.cy[cells] + 0.5 * sgn * self.hy[cells]
        return BoundaryFaces(cells, length, mid_x, mid_y)

    # ------------------------------------------------------------------
    def iter_faces(self):
        """Yield flat :class:`Face` records for all faces (test helper)."""
        f = self.faces
        for axis, grp in ((0, f.conf_x), (1, f.conf_y)):
            normal = (1.0, 0.0) if axis == 0 else (0.0, 1.0)
            for i in range(grp.left.size):
                yield Face("interior", int(grp.left[i]), int(grp.right[i]), normal, float(grp.length[i]))
        for axis, grp in ((0, f.hang_x), (1, f.hang_y)):
            normal = (1.0, 0.0) if axis == 0 else (0.0, 1.0)
            for i in range(grp.fine.size):
                if grp.coarse_left[i]:
                    l, r = int(grp.coarse[i]), int(grp.fine[i])
                else:
                    l, r = int(grp.fine[i]), int(grp.coarse[i])
                yield Face("interior", l, r, normal, float(grp.length[i]), sub=int(grp.sub[i]))
        for side in BOUNDARY_SIDES:
            grp = f.boundary[side]
            normal = {
                "xmin": (-1.0, 0.0),
                "xmax": (1.0, 0.0),
                "ymin": (0.0, -1.0),
                "ymax": (0.0, 1.0),
            }[side]
            for i in range(grp.cells.size):
                yield Face("boundary", int(grp.cells[i]), None, normal, float(grp.length[i]))

    def validate(self):
        """Exhaustive structural checks: exact tiling, 2:1 balance, face coverage."""
        x0, x1, y0, y1 = self.domain
        total = (x1 - x0) * (y1 - y0)
        if abs(self.area.sum() - total) > 1e-12 * total:
            raise MeshError("leaf areas do not tile the domain")
        # every cell edge must be covered by faces of exactly its own length
        cover = np.zeros((self.n_cells, 4))  # -x, +x, -y, +y
        f = self.faces
        np.add.at(cover[:, 1], f.conf_x.left, f.conf_x.length)
        np.add.at(cover[:, 0], f.conf_x.right, f.conf_x.length)
        np.add.at(cover[:, 3], f.conf_y.left, f.conf_y.length)
        np.add.at(cover[:, 2], f.conf_y.right, f.conf_y.length)
        for grp, lo_slot, hi_slot in ((f.hang_x, 0, 1), (f.hang_y, 2, 3)):
            cl = grp.coarse_left
            np.add.at(cover[:, hi_slot], grp.coarse[cl], grp.length[cl])
            np.add.at(cover[:, lo_slot], grp.fine[cl], grp.length[cl])
            np.add.at(cover[:, lo_slot], grp.coarse[~cl], grp.length[~cl])
            np.add.at(cover[:, hi_slot], grp.fine[~cl], grp.length[~cl])
        np.add.at(cover[:, 0], f.boundary["xmin"].cells, f.boundary["xmin"].length)
        np.add.at(cover[:, 1], f.boundary["xmax"].cells, f.boundary["xmax"].length)
        np.add.at(cover[:, 2], f.boundary["ymin"].cells, f.boundary["ymin"].length)
        np.add.at(cover[:, 3], f.boundary["ymax"].cells, f.boundary["ymax"].length)
        want = np.stack([self.hy, self.hy, self.hx, self.hx], axis=1)
        if not np.allclose(cover, want, rtol=1e-12, atol=1e-14):
            raise MeshError("face coverage of cell edges is inconsistent")
        # 2:1 balance: conforming faces join equal levels, hanging differ by one
        if f.conf_x.left.size and np.any(self.level[f.conf_x.left] != self.level[f.conf_x.right]):
            raise MeshError("conforming x-face joins different levels")
        if f.conf_y.left.size and np.any(self.level[f.conf_y.left] != self.level[f.conf_y.right]):
            raise MeshError("conforming y-face joins different levels")
        for grp in (f.hang_x, f.hang_y):
            if grp.fine.size and np.any(self.level[grp.fine] != self.level[grp.coarse] + 1):
                raise MeshError("hanging face levels are not 2:1")
        return True


# ----------------------------------------------------------------------
@dataclass
class MeshTransfer:
    """Cell-level provenance of one adaptation step.

    ``kept`` rows copy a leaf unchanged; ``child`` rows replace one old leaf
    with four children identified by quadrant bits; ``parent`` rows merge a
    sibling quadruple (children ordered by quadrant index qy*2 + qx).
    """

    n_old: int
    n_new: int
    kept_old: np.ndarray
    kept_new: np.ndarray
    child_new: np.ndarray
    child_old: np.ndarray
    child_qx: np.ndarray
    child_qy: np.ndarray
    parent_new: np.ndarray
    parent_children_old: np.ndarray  # (n_parents, 4)


def build_uniform(nx, ny, domain=(0.0, 1.0, 0.0, 1.0), *, periodic_x=False,
                  periodic_y=False, max_level=8) -> QuadMesh:
    """Uniform level-0 Cartesian mesh over a rectangle."""
    if nx < 1 or ny < 1:
        raise MeshError(f"need nx, ny >= 1, got {nx}, {ny}")
    ix, iy = np.meshgrid(np.arange(nx), np.arange(ny), indexing="xy")
    return QuadMesh(
        domain, nx, ny,
        np.zeros(nx * ny, dtype=np.int64), ix.ravel(), iy.ravel(),
        periodic_x=periodic_x, periodic_y=periodic_y, max_level=max_level,
    )


def min_diameter(mesh: QuadMesh) -> float:
    if mesh.n_cells == 0:
        raise MeshError("empty mesh")
    return float(mesh.diam.min())


def _refine_once(mesh: QuadMesh, marks: np.ndarray):
    """Replace each marked leaf with its four children (no balance pass)."""
    nc = mesh.n_cells
    keep = np.ones(nc, dtype=bool)
    keep[marks] = False
    kept_ids = np.nonzero(keep)[0]

    qx = np.array([0, 1, 0, 1])
    qy = np.array([0, 0, 1, 1])
    ml, mx, my = mesh.level[marks], mesh.ix[marks], mesh.iy[marks]
    ch_level = np.repeat(ml + 1, 4)
    ch_ix = (2 * mx)[:, None] + qx[None, :]
    ch_iy = (2 * my)[:, None] + qy[None, :]
    ch_old = np.repeat(marks, 4)
    ch_qx = np.tile(qx, marks.size)
    ch_qy = np.tile(qy, marks.size)

    level = np.concatenate([mesh.level[kept_ids], ch_level])
    ix = np.concatenate([mesh.ix[kept_ids], ch_ix.ravel()])
    iy = np.concatenate([mesh.iy[kept_ids], ch_iy.ravel()])
    new = QuadMesh(
        mesh.domain, mesh.nx, mesh.ny, level, ix, iy,
        periodic_x=mesh.periodic_x, periodic_y=mesh.periodic_y,
        max_level=mesh.max_level,
    )
    inv = np.empty(new.n_cells, dtype=np.int64)
    inv[new._sort_perm] = np.arange(new.n_cells)
    n_kept = kept_ids.size
    transfer = MeshTransfer(
        n_old=nc,
        n_new=new.n_cells,
        kept_old=kept_ids,
        kept_new=inv[:n_kept],
        child_new=inv[n_kept:],
        child_old=ch_old,
        child_qx=ch_qx,
        child_qy=ch_qy,
        parent_new=np.empty(0, dtype=np.int64),
        parent_children_old=np.empty((0, 4), dtype=np.int64),
    )
    return new, transfer


def _balance_marks(mesh: QuadMesh) -> np.ndarray:
    """Leaves that must refine because a face neighbor is two levels finer."""
    bad = np.zeros(mesh.n_cells, dtype=bool)
    lev, ix, iy = mesh.level, mesh.ix, mesh.iy
    for axis in (0, 1):
        ia = ix if axis == 0 else iy
        it = iy if axis == 0 else ix
        roots = mesh.nx if axis == 0 else mesh.ny
        n_side = roots << lev
        for step in (-1, 1):
            tgt = ia + step
            valid = (tgt >= 0) & (tgt < n_side)
            # walk up through coarser ancestors of the neighbor position;
            # a hit at two or more levels up flags that ancestor
            pending = valid.copy()
            for delta in range(0, int(lev.max(initial=0)) + 1):
                if not pending.any():
                    break
                can = pending & (lev - delta >= 0)
                if not can.any():
                    break
                a = tgt >> delta
                t = it >> delta
                if axis == 0:
                    hit = mesh.lookup(lev - delta, a, t)
                else:
                    hit = mesh.lookup(lev - delta, t, a)
                found = can & (hit >= 0)
                if delta >= 2:
                    bad[hit[found]] = True
                pending &= ~found
    return np.nonzero(bad)[0]


def refine_with_transfer(mesh: QuadMesh, marks):
    """Refine marked leaves, then restore 2:1 balance.

    Returns the new mesh and the list of single-level transfers applied, in
    order. Marks at ``max_level`` are dropped; periodic meshes stay uniform.
    """
    marks = np.unique(np.asarray(list(marks), dtype=np.int64).ravel()) if len(marks) else np.empty(0, np.int64)
    marks = marks[mesh.level[marks] < mesh.max_level] if marks.size else marks
    transfers = []
    if marks.size and (mesh.periodic_x or mesh.periodic_y):
        raise MeshError("periodic meshes cannot be refined")
    current = mesh
    while marks.size:
        current, tr = _refine_once(current, marks)
        transfers.append(tr)
        marks = _balance_marks(current)
        marks = marks[current.level[marks] < current.max_level] if marks.size else marks
    return current, transfers


def refine(mesh: QuadMesh, marks) -> QuadMesh:
    new, _ = refine_with_transfer(mesh, marks)
    return new


def coarsen_with_transfer(mesh: QuadMesh, marks):
    """Merge sibling quadruples whose four leaves are all marked.

    A merge is skipped when the would-be parent would sit two levels below
    any current neighbor leaf, which keeps the mesh balanced without a
    follow-up pass.
    """
    marks = np.unique(np.asarray(list(marks), dtype=np.int64).ravel()) if len(marks) else np.empty(0, np.int64)
    marks = marks[mesh.level[marks] >= 1] if marks.size else marks
    if marks.size == 0:
        ident = MeshTransfer(
            mesh.n_cells, mesh.n_cells,
            np.arange(mesh.n_cells), np.arange(mesh.n_cells),
            np.empty(0, np.int64), np.empty(0, np.int64),
            np.empty(0, np.int64), np.empty(0, np.int64),
            np.empty(0, np.int64), np.empty((0, 4), np.int64),
        )
        return mesh, ident

    marked = np.zeros(mesh.n_cells, dtype=bool)
    marked[marks] = True
    lev, ix, iy = mesh.level[marks], mesh.ix[marks], mesh.iy[marks]
    parent_key = _encode(lev - 1, ix >> 1, iy >> 1)
    uniq, first = np.unique(parent_key, return_index=True)

    parents = []
    for key, i0 in zip(uniq, first):
        pl, px, py = int(lev[i0]) - 1, int(ix[i0]) >> 1, int(iy[i0]) >> 1
        kids = mesh.lookup(
            np.full(4, pl + 1),
            2 * px + np.array([0, 1, 0, 1]),
            2 * py + np.array([0, 0, 1, 1]),
        )
        if np.any(kids < 0) or not marked[kids].all():
            continue
        if not _merge_keeps_balance(mesh, pl, px, py):
            continue
        parents.append((pl, px, py, kids))

    if not parents:
        return coarsen_with_transfer(mesh, [])

    drop = np.zeros(mesh.n_cells, dtype=bool)
    p_level = np.array([p[0] for p in parents], dtype=np.int64)
    p_ix = np.array([p[1] for p in parents], dtype=np.int64)
    p_iy = np.array([p[2] for p in parents], dtype=np.int64)
    p_kids = np.stack([p[3] for p in parents])
    drop[p_kids.ravel()] = True
    kept_ids = np.nonzero(~drop)[0]

    level = np.concatenate([mesh.level[kept_ids], p_level])
    nix = np.concatenate([mesh.ix[kept_ids], p_ix])
    niy = np.concatenate([mesh.iy[kept_ids], p_iy])
    new = QuadMesh(
        mesh.domain, mesh.nx, mesh.ny, level, nix, niy,
        periodic_x=mesh.periodic_x, periodic_y=mesh.periodic_y,
        max_level=mesh.max_level,
    )
    inv = np.empty(new.n_cells, dtype=np.int64)
    inv[new._sort_perm] = np.arange(new.n_cells)
    n_kept = kept_ids.size
    transfer = MeshTransfer(
        n_old=mesh.n_cells,
        n_new=new.n_cells,
        kept_old=kept_ids,
        kept_new=inv[:n_kept],
        child_new=np.empty(0, np.int64),
        child_old=np.empty(0, np.int64),
        child_qx=np.empty(0, np.int64),
        child_qy=np.empty(0, np.int64),
        parent_new=inv[n_kept:],
        parent_children_old=p_kids,
    )
    return new, transfer


def _merge_keeps_balance(mesh: QuadMesh, pl: int, px: int, py: int) -> bool:
    """True when the merged parent at (pl, px, py) has no neighbor finer than pl+1.

    Each edge-neighbor position at level pl+1 must be covered by a leaf at
    level <= pl+1; uncovered means strictly finer leaves live there.
    """
    l = pl + 1
    n_x = mesh.nx << l
    n_y = mesh.ny << l
    probes = []
    for dy in (0, 1):
        probes.append((2 * px - 1, 2 * py + dy))
        probes.append((2 * px + 2, 2 * py + dy))
    for dx in (0, 1):
        probes.append((2 * px + dx, 2 * py - 1))
        probes.append((2 * px + dx, 2 * py + 2))
    for jx, jy in probes:
        if jx < 0 or jy < 0 or jx >= n_x or jy >= n_y:
            continue
        covered = False
        for delta in range(l + 1):
            if mesh.lookup(np.array([l - delta]), np.array([jx >> delta]), np.array([jy >> delta]))[0] >= 0:
                covered = True
                break
        if not covered:
            return False
    return True


def coarsen(mesh: QuadMesh, marks) -> QuadMesh:
    new, _ = coarsen_with_transfer(mesh, marks)
    return new
