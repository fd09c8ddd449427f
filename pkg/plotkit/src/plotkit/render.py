"""Figure rendering for the five plot kinds.

Everything is drawn with a fixed style so identical inputs produce
identical image bytes: Agg backend, pinned figure geometry and fonts, no
timestamps in the output metadata. The conventions follow the benchmark
reports this toolkit accompanies: references in black lines, filtered
results as red markers, unfiltered results as thin red lines.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .specs import PlotSpec, SpecError, check_columns, read_csv  # noqa: E402

_RC = {
    "figure.figsize": (6.0, 4.2),
    "figure.dpi": 125,
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.dpi": 125,
}

_ROLE_STYLE = {
    "reference": dict(color="black", lw=1.2, zorder=3),
    "unfiltered": dict(color="tab:red", lw=0.8, alpha=0.8, zorder=2),
    "filtered": dict(color="tab:red", marker="o", ls="none", ms=2.4, zorder=4),
}


def _new_figure(spec):
    fig, ax = plt.subplots()
    if spec.title:
        ax.set_title(spec.title)
    return fig, ax


def _save(fig, spec) -> str:
    fig.tight_layout()
    fig.savefig(spec.output, metadata={"Software": "plotkit"})
    plt.close(fig)
    return spec.output


def _abscissa(cols):
    return cols["x"] if "x" in cols else cols["r"]


def _nearest_line(cols, axis, value):
    held = cols["y"] if axis == "y" else cols["x"]
    along = cols["x"] if axis == "y" else cols["y"]
    nearest = held[np.argmin(np.abs(held - value))]
    sel = np.abs(held - nearest) <= 1e-12 * max(1.0, abs(nearest))
    order = np.argsort(along[sel])
    return along[sel][order], sel, order


def render_line_cut(spec: PlotSpec, tables) -> str:
    fig, ax = _new_figure(spec)
    for s in spec.series:
        cols = tables[s.path]
        if s.role == "reference":
            xs = _abscissa(cols)
            ax.plot(xs, cols[spec.variable], label=s.label, **_ROLE_STYLE[s.role])
            continue
        xs, sel, order = _nearest_line(cols, spec.axis, spec.value)
        ax.plot(xs, cols[spec.variable][sel][order], label=s.label, **_ROLE_STYLE[s.role])
    ax.set_xlabel("x" if spec.axis == "y" else "y")
    ax.set_ylabel(spec.variable)
    ax.legend(fontsize=8)
    return _save(fig, spec)


def render_radial_scatter(spec: PlotSpec, tables) -> str:
    fig, ax = _new_figure(spec)
    edges = np.linspace(0.0, spec.r_max, spec.n_bins + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    for s in spec.series:
        cols = tables[s.path]
        if s.role == "reference":
            ax.plot(_abscissa(cols), cols[spec.variable], label=s.label,
                    **_ROLE_STYLE[s.role])
            continue
        r = np.hypot(cols["x"], cols["y"])
        v = cols[spec.variable]
        idx = np.clip(np.digitize(r, edges) - 1, 0, spec.n_bins - 1)
        inside = r <= spec.r_max
        count = np.bincount(idx[inside], minlength=spec.n_bins)
        mean = np.bincount(idx[inside], weights=v[inside], minlength=spec.n_bins)
        ok = count > 0
        ax.plot(centers[ok], mean[ok] / count[ok], label=s.label, **_ROLE_STYLE[s.role])
    ax.set_xlabel("r")
    ax.set_ylabel(spec.variable)
    ax.legend(fontsize=8)
    return _save(fig, spec)


def render_contour(spec: PlotSpec, tables) -> str:
    fig, ax = _new_figure(spec)
    drew = False
    for s in spec.series:
        if s.role == "reference":
            continue
        cols = tables[s.path]
        ax.tricontour(cols["x"], cols["y"], cols[spec.variable],
                      levels=spec.levels, linewidths=0.5, colors="k")
        cs = ax.tricontourf(cols["x"], cols["y"], cols[spec.variable],
                            levels=spec.levels, cmap="viridis")
        fig.colorbar(cs, ax=ax, label=spec.variable)
        drew = True
        break
    if not drew:
        plt.close(fig)
        raise SpecError("contour plot needs a non-reference series")
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    return _save(fig, spec)


def render_grid_wireframe(spec: PlotSpec, tables) -> str:
    fig, ax = _new_figure(spec)
    drew = False
    for s in spec.series:
        if s.role == "reference":
            continue
        cols = tables[s.path]
        cell = cols["cell_id"].astype(int)
        order = np.argsort(cell, kind="stable")
        cid = cell[order]
        xs = cols["x"][order]
        ys = cols["y"][order]
        bounds = np.nonzero(np.diff(cid))[0] + 1
        for lo, hi in zip(np.concatenate([[0], bounds]),
                          np.concatenate([bounds, [cid.size]])):
            x0, x1 = xs[lo:hi].min(), xs[lo:hi].max()
            y0, y1 = ys[lo:hi].min(), ys[lo:hi].max()
            ax.plot([x0, x1, x1, x0, x0], [y0, y0, y1, y1, y0],
                    color="black", lw=0.3)
        drew = True
        break
    if not drew:
        plt.close(fig)
        raise SpecError("grid wireframe needs a non-reference series")
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    return _save(fig, spec)


def render_convergence(spec: PlotSpec, tables) -> str:
    fig, ax = _new_figure(spec)
    guide_anchor = None
    for s in spec.series:
        cols = tables[s.path]
        n = cols["n_el"]
        err = cols[spec.norm]
        style = _ROLE_STYLE[s.role].copy()
        if s.role == "filtered":
            style.update(ls="-", lw=0.9)
        ax.loglog(n, err, label=s.label, **style)
        guide_anchor = guide_anchor or (n, err)
    if spec.guide_order and guide_anchor is not None:
        n, err = guide_anchor
        guide = err[0] * (n / n[0]) ** (-spec.guide_order)
        ax.loglog(n, guide, "k--", lw=0.8,
                  label=f"order {spec.guide_order:g} guide")
    ax.set_xlabel("cells per direction")
    ax.set_ylabel(spec.norm)
    ax.legend(fontsize=8)
    return _save(fig, spec)


_RENDERERS = {
    "line_cut": render_line_cut,
    "radial_scatter": render_radial_scatter,
    "contour": render_contour,
    "grid_wireframe": render_grid_wireframe,
    "convergence": render_convergence,
}


def render(spec: PlotSpec) -> str:
    """Validate the spec's inputs and write the figure; returns the path."""
    tables = {s.path: read_csv(s.path) for s in spec.series}
    check_columns(spec, tables)
    with plt.rc_context(_RC):
        return _RENDERERS[spec.kind](spec, tables)
