"""Plot specifications: an INI file naming input CSVs, a plot kind and styling.

Column requirements are checked before any rendering starts, so a spec that
points at mismatched files fails with the missing columns listed by name.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field

import numpy as np

KINDS = ("line_cut", "radial_scatter", "contour", "grid_wireframe", "convergence")


class SpecError(Exception):
    pass


@dataclass
class Series:
    path: str
    label: str
    role: str  # "filtered" | "unfiltered" | "reference"


@dataclass
class PlotSpec:
    kind: str
    output: str
    series: list[Series]
    variable: str = "rho"
    title: str = ""
    axis: str = "y"          # line_cut: coordinate held fixed
    value: float = 0.0
    r_max: float = 1.2
    n_bins: int = 400
    levels: int = 30
    norm: str = "l1_rel"     # convergence: error column to plot
    guide_order: float | None = None


def read_csv(path: str) -> dict[str, np.ndarray]:
    if not os.path.exists(path):
        raise SpecError(f"input file does not exist: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        try:
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise SpecError(f"{path}: not a numeric CSV table ({exc})") from exc
    if data.shape[1] != len(header):
        raise SpecError(f"{path}: header names {len(header)} columns, rows have {data.shape[1]}")
    return {name: data[:, i] for i, name in enumerate(header)}


_REQUIRED = {
    "line_cut": ("x", "y"),
    "radial_scatter": ("x", "y"),
    "contour": ("x", "y"),
    "grid_wireframe": ("cell_id", "x", "y"),
    "convergence": ("n_el",),
}


def check_columns(spec: PlotSpec, tables: dict[str, dict[str, np.ndarray]]):
    """Every referenced column must exist in every referenced table."""
    problems = []
    for s in spec.series:
        cols = tables[s.path]
        needed = list(_REQUIRED[spec.kind])
        if spec.kind in ("line_cut", "radial_scatter", "contour", "grid_wireframe"):
            if s.role == "reference":
                needed = [spec.variable]  # reference tables carry their own abscissa
                if "x" not in cols and "r" not in cols:
                    problems.append(f"{s.path}: missing column 'x' or 'r'")
            else:
                needed.append(spec.variable)
        if spec.kind == "convergence":
            needed.append(spec.norm)
        for name in needed:
            if name not in cols:
                problems.append(f"{s.path}: missing column {name!r}")
    if problems:
        raise SpecError("column check failed:\n  " + "\n  ".join(problems))


def load_spec(path: str) -> PlotSpec:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cp.read_file(fh, source=path)
    except OSError as exc:
        raise SpecError(f"cannot read spec file {path}: {exc}") from exc
    except configparser.Error as exc:
        raise SpecError(str(exc)) from exc

    if not cp.has_section("plot"):
        raise SpecError("spec needs a [plot] section")
    kind = cp.get("plot", "kind", fallback=None)
    if kind not in KINDS:
        raise SpecError(f"plot.kind must be one of {KINDS}, got {kind!r}")
    output = cp.get("plot", "output", fallback=None)
    if not output:
        raise SpecError("plot.output is required")

    base = os.path.dirname(os.path.abspath(path))

    def resolve(p):
        return p if os.path.isabs(p) else os.path.join(base, p)

    series: list[Series] = []
    if cp.has_section("input"):
        for key, value in cp["input"].items():
            role = "filtered"
            if key.startswith("reference"):
                role = "reference"
            elif key.startswith("unfiltered"):
                role = "unfiltered"
            label = key.replace("_", " ")
            series.append(Series(resolve(value.strip()), label, role))
    if not series:
        raise SpecError("input: at least one series is required")

    style = cp["style"] if cp.has_section("style") else {}
    spec = PlotSpec(
        kind=kind,
        output=resolve(cp.get("plot", "output")),
        series=series,
        variable=style.get("variable", "rho"),
        title=cp.get("plot", "title", fallback=""),
        axis=style.get("axis", "y"),
        value=float(style.get("value", 0.0)),
        r_max=float(style.get("r_max", 1.2)),
        n_bins=int(style.get("n_bins", 400)),
        levels=int(style.get("levels", 30)),
        norm=style.get("norm", "l1_rel"),
        guide_order=float(style["guide_order"]) if "guide_order" in style else None,
    )
    return spec
