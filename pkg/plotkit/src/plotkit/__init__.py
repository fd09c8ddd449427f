"""Figures from dgbench CSV outputs: line cuts, radial scatters, contours,
grid wireframes and convergence plots, driven by INI plot specs."""

from .render import render
from .specs import PlotSpec, Series, SpecError, load_spec, read_csv

__version__ = "0.1.0"

__all__ = ["PlotSpec", "Series", "SpecError", "load_spec", "read_csv", "render", "__version__"]
