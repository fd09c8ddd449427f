"""Report figures rendered at the end of a benchmark run.

Rendering is intentionally small here: one extrema-history panel for every
run plus one benchmark-specific comparison figure, written next to the
delimited output. Everything uses the Agg backend so headless runs work.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

import numpy as np  # noqa: E402

from .models import conserved_to_primitive  # noqa: E402
from .reference import radial_bins, sod_exact  # noqa: E402


def render_history(rows, names, path):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    t = [r["t"] for r in rows]
    for name in names:
        ax.plot(t, [r[f"min_{name}"] for r in rows], label=f"min {name}", lw=0.9)
        ax.plot(t, [r[f"max_{name}"] for r in rows], label=f"max {name}", lw=0.9)
    ax.set_xlabel("t")
    ax.set_ylabel("field extrema")
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def _line_cut(field, axis, value):
    """Select the nodes on the node line nearest to the requested value."""
    disc = field.disc
    coords = disc.node_y if axis == "y" else disc.node_x
    other = disc.node_x if axis == "y" else disc.node_y
    nearest = coords.ravel()[np.argmin(np.abs(coords.ravel() - value))]
    sel = np.abs(coords - nearest) <= 1e-12 * max(1.0, abs(nearest))
    return other[sel], sel, float(nearest)


def render_scalar_cut(field, exact, path, axis="y", value=0.0):
    """Scatter of nodal values along a grid line against the exact profile."""
    xs, sel, value = _line_cut(field, axis, value)
    order = np.argsort(xs)
    xs = xs[order]
    vals = field.data[0][sel][order]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if exact is not None:
        fine = np.linspace(xs.min(), xs.max(), 600)
        line = np.full_like(fine, value)
        ref = exact(fine, line) if axis == "y" else exact(line, fine)
        ax.plot(fine, ref[0], "k-", lw=1.0, label="exact")
    ax.plot(xs, vals, "r.", ms=3, label="filtered")
    ax.set_xlabel("x" if axis == "y" else "y")
    ax.set_ylabel("u")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def render_sod_profiles(field, t, eos, path):
    disc = field.disc
    y_mid = 0.5 * (disc.mesh.domain[2] + disc.mesh.domain[3])
    tol = 0.51 * float(disc.mesh.hy.min())
    sel = np.abs(disc.node_y - y_mid) <= tol
    if not sel.any():  # nodes straddle the midline for odd node counts
        sel = np.abs(disc.node_y - disc.node_y.ravel()[0]) <= tol
    xs = disc.node_x[sel]
    order = np.argsort(xs)
    xs = xs[order]
    rho, u, _, p = conserved_to_primitive(field.data, eos)
    panels = [("density", rho[sel][order]), ("velocity", u[sel][order]), ("pressure", p[sel][order])]
    fine = np.linspace(xs.min(), xs.max(), 1000)
    er, eu, ep = sod_exact(fine, t, eos)
    exact = {"density": er, "velocity": eu, "pressure": ep}
    fig, axes = plt.subplots(3, 1, figsize=(6.0, 9.0))
    for ax, (name, vals) in zip(axes, panels):
        ax.plot(fine, exact[name], "k-", lw=1.0, label="exact")
        ax.plot(xs, vals, "r.", ms=3, label="numeric")
        ax.set_ylabel(name)
        ax.legend(fontsize=8)
    axes[-1].set_xlabel("x")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def render_radial_profiles(field, oracle, t, eos, path, r_max=1.2):
    centers, mean_rho, _, _, count = radial_bins(field, "rho", r_max=r_max)
    p = conserved_to_primitive(field.data, eos)[3]
    fig, axes = plt.subplots(2, 1, figsize=(6.0, 7.0))
    ok = count > 0
    if oracle is not None:
        rr = np.linspace(0.0, r_max, 1200)
        orho, _, op = oracle.sample(rr, t)
        axes[0].plot(rr, orho, "k-", lw=1.0, label="radial reference")
        axes[1].plot(rr, op, "k-", lw=1.0, label="radial reference")
    axes[0].plot(centers[ok], mean_rho[ok], "r.", ms=3, label="binned numeric")
    _, mean_p, _, _, _ = radial_bins(field, values=p, r_max=r_max)
    axes[1].plot(centers[ok], mean_p[ok], "r.", ms=3, label="binned numeric")
    axes[0].set_ylabel("density")
    axes[1].set_ylabel("pressure")
    axes[1].set_xlabel("r")
    for ax in axes:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def render_density_contours(field, path, levels=30):
    disc = field.disc
    x = disc.node_x.ravel()
    y = disc.node_y.ravel()
    rho = field.var("rho").ravel()
    fig, ax = plt.subplots(figsize=(6.0, 5.4))
    ax.tricontour(x, y, rho, levels=levels, linewidths=0.5, colors="k")
    cs = ax.tricontourf(x, y, rho, levels=levels, cmap="viridis")
    fig.colorbar(cs, ax=ax, label="density")
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def render_run_figures(field, setup, rows, t, oracle, outdir) -> list[str]:
    """Benchmark-appropriate report figures; returns the written paths."""
    paths = []
    if rows:
        paths.append(render_history(rows, field.names, os.path.join(outdir, "history.png")))
    name = setup.name
    if name == "sod":
        paths.append(render_sod_profiles(field, t, setup.model.eos,
                                         os.path.join(outdir, "profiles.png")))
    elif name == "explosion":
        paths.append(render_radial_profiles(field, oracle, t, setup.model.eos,
                                            os.path.join(outdir, "radial.png")))
    elif name in ("riemann2d", "isentropic_vortex"):
        paths.append(render_density_contours(field, os.path.join(outdir, "contours.png")))
    elif name in ("solid_body_rotation", "custom"):
        value = 1.0 / 6.0 if name == "solid_body_rotation" else 0.5
        exact = (lambda xs, ys: setup.exact(xs, ys, t)) if setup.exact else None
        paths.append(render_scalar_cut(field, exact,
                                       os.path.join(outdir, "cut.png"), value=value))
    return paths
