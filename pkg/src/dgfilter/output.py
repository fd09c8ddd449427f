"""File emitters: delimited nodal dumps, legacy VTK, history series and
plain-text result tables.

CSV numbers use the shortest decimal that round-trips to the same double,
so identical runs produce bit-identical files and re-reading a dump
recovers the nodal values exactly.
"""

from __future__ import annotations

import os

import numpy as np

from .dg import NodalField
from .models import conserved_to_primitive


def _fmt(x: float) -> str:
    return repr(float(x))


def _field_columns(field: NodalField, eos=None):
    """Column names and per-node arrays: conserved vars plus Euler primitives."""
    names = list(field.names)
    arrays = [field.data[i] for i in range(len(names))]
    if eos is not None and "rho" in field.names and "energy" in field.names:
        rho, u, v, p = conserved_to_primitive(field.data, eos)
        names += ["u", "v", "p"]
        arrays += [u, v, p]
    return names, arrays


def emit_field_csv(field: NodalField, path: str, eos=None) -> str:
    """One row per node: cell_id, level, x, y, node_i, then variable columns."""
    disc = field.disc
    mesh = disc.mesh
    n = disc.n1d
    names, arrays = _field_columns(field, eos)
    lines = ["cell_id,level,x,y,node_i," + ",".join(names)]
    xs = disc.node_x
    ys = disc.node_y
    for c in range(mesh.n_cells):
        lev = int(mesh.level[c])
        for i in range(n):
            for j in range(n):
                node_i = i * n + j
                vals = ",".join(_fmt(a[c, i, j]) for a in arrays)
                lines.append(
                    f"{c},{lev},{_fmt(xs[c, i, j])},{_fmt(ys[c, i, j])},{node_i},{vals}"
                )
    payload = "\n".join(lines) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(payload)
    return path


def read_field_csv(path: str):
    """Parse a field dump back into a dict of column name -> float array."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    cols = {name: np.array([float(r[i]) for r in rows]) for i, name in enumerate(header)}
    return cols


def emit_field_vtk(field: NodalField, path: str, eos=None) -> str:
    """Legacy ASCII unstructured grid with each cell split into bilinear quads."""
    disc = field.disc
    mesh = disc.mesh
    n = disc.n1d
    k = disc.degree
    names, arrays = _field_columns(field, eos)
    n_pts = mesh.n_cells * n * n
    n_quads = mesh.n_cells * k * k

    out = ["# vtk DataFile Version 3.0", "dgfilter field dump", "ASCII",
           "DATASET UNSTRUCTURED_GRID", f"POINTS {n_pts} double"]
    xs, ys = disc.node_x, disc.node_y
    for c in range(mesh.n_cells):
        for i in range(n):
            for j in range(n):
                out.append(f"{_fmt(xs[c, i, j])} {_fmt(ys[c, i, j])} 0.0")

    out.append(f"CELLS {n_quads} {5 * n_quads}")
    for c in range(mesh.n_cells):
        base = c * n * n
        for i in range(k):
            for j in range(k):
                p00 = base + i * n + j
                p10 = base + (i + 1) * n + j
                p11 = base + (i + 1) * n + (j + 1)
                p01 = base + i * n + (j + 1)
                out.append(f"4 {p00} {p10} {p11} {p01}")
    out.append(f"CELL_TYPES {n_quads}")
    out.extend(["9"] * n_quads)

    out.append(f"POINT_DATA {n_pts}")
    for name, arr in zip(names, arrays):
        out.append(f"SCALARS {name} double 1")
        out.append("LOOKUP_TABLE default")
        for c in range(mesh.n_cells):
            for i in range(n):
                for j in range(n):
                    out.append(_fmt(arr[c, i, j]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(out) + "\n")
    return path


def emit_history_csv(rows: list[dict], path: str) -> str:
    """Per-step diagnostics; column set comes from the first row."""
    if not rows:
        raise ValueError("no history rows to write")
    cols = list(rows[0])
    lines = [",".join(cols)]
    for row in rows:
        lines.append(",".join(
            _fmt(row[c]) if isinstance(row[c], float) else str(row[c]) for c in cols))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def _sci(x: float) -> str:
    return f"{x:.2e}"


def emit_table(rows: list[dict], variable: str = "rho") -> str:
    """Aligned convergence table: N_el, errors with observed rates, extrema.

    Each row needs keys ``n_el`` and ``errors`` (a mapping with l1_rel,
    l2_rel, linf_rel, max_value, min_value). Rates are recomputed from the
    listed errors and the N_el ratios; the first row has none.
    """
    if not rows:
        raise ValueError("need at least one report row")
    header = ["N_el", "L1 rel.", "L1 rate", "L2 rel.", "L2 rate",
              "Linf rel.", "Linf rate", "max", "min"]
    body = []
    for i, row in enumerate(rows):
        err = row["errors"]
        cells = [str(row["n_el"])]
        for key in ("l1_rel", "l2_rel", "linf_rel"):
            cells.append(_sci(err[key]))
            if i == 0:
                cells.append("—")
            else:
                prev = rows[i - 1]["errors"][key]
                factor = row["n_el"] / rows[i - 1]["n_el"]
                if prev > 0 and err[key] > 0 and factor > 1:
                    rate = np.log(prev / err[key]) / np.log(factor)
                    cells.append(f"{rate:.2f}")
                else:
                    cells.append("—")
        cells.append(_sci(err["max_value"]))
        cells.append(_sci(err["min_value"]))
        body.append(cells)
    widths = [max(len(header[c]), *(len(r[c]) for r in body)) for c in range(len(header))]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for r in body:
        lines.append("  ".join(v.rjust(w) for v, w in zip(r, widths)))
    return "\n".join(lines)


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path
