"""Run configuration: INI-style files with sections per subsystem.

A configuration names a benchmark and overrides its defaults. Sections are
``[run]``, ``[mesh]``, ``[time]``, ``[filter]``, ``[amr]``, ``[output]`` and
(for the free-form benchmark) ``[custom]``. Every value is validated up
front; problems are reported as ``section.key: message`` diagnostics before
any computation starts. ``--set section.key=value`` command-line overrides
are applied on the raw text values.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field as dc_field

from .errors import ConfigError

_BOOL = {"true": True, "yes": True, "on": True, "1": True,
         "false": False, "no": False, "off": False, "0": False}

KNOWN_SECTIONS = ("run", "mesh", "time", "filter", "amr", "output", "custom")


@dataclass
class FilterSettings:
    enabled: bool = True
    function: str = "f1"
    mode: str = "relative"
    c0: float | None = None
    beta: float | None = None
    beta_rho: float | None = None
    beta_momentum: float | None = None
    beta_energy: float | None = None
    denominator_floor: float = 1e-8
    gauge: str = "state"
    low_order: str = "subcell"


@dataclass
class AmrSettings:
    enabled: bool = False
    max_level: int = 2
    refine_fraction: float = 0.2
    coarsen_fraction: float = 0.05
    interval: int = 5
    initial_cycles: int = 3


@dataclass
class OutputSettings:
    directory: str = "out"
    formats: tuple[str, ...] = ("csv",)
    figures: bool = True
    history: bool = True
    dump_times: tuple[float, ...] = ()


@dataclass
class RunConfig:
    benchmark: str
    degree: int = 1
    scheme: str = "auto"           # auto | ssp2 | ssp3
    solver: str = "filtered"       # filtered | high_order | low_order
    gamma: float = 1.4
    nx: int | None = None
    ny: int | None = None
    time_mode: str = "courant"     # courant | fixed_dt
    courant: float = 0.1
    dt: float | None = None
    t_final: float | None = None
    filter: FilterSettings = dc_field(default_factory=FilterSettings)
    amr: AmrSettings = dc_field(default_factory=AmrSettings)
    output: OutputSettings = dc_field(default_factory=OutputSettings)
    custom: dict = dc_field(default_factory=dict)

    def manifest_text(self) -> str:
        """Echo of the fully resolved configuration, reloadable as a config."""
        cp = configparser.ConfigParser()
        cp["run"] = {
            "benchmark": self.benchmark,
            "degree": str(self.degree),
            "scheme": self.scheme,
            "solver": self.solver,
            "gamma": repr(self.gamma),
        }
        cp["mesh"] = {}
        if self.nx is not None:
            cp["mesh"]["nx"] = str(self.nx)
        if self.ny is not None:
            cp["mesh"]["ny"] = str(self.ny)
        cp["time"] = {"mode": self.time_mode, "courant": repr(self.courant)}
        if self.dt is not None:
            cp["time"]["dt"] = repr(self.dt)
        if self.t_final is not None:
            cp["time"]["t_final"] = repr(self.t_final)
        f = self.filter
        cp["filter"] = {"enabled": str(f.enabled).lower(), "function": f.function,
                        "mode": f.mode, "gauge": f.gauge, "low_order": f.low_order,
                        "denominator_floor": repr(f.denominator_floor)}
        for key in ("c0", "beta", "beta_rho", "beta_momentum", "beta_energy"):
            val = getattr(f, key)
            if val is not None:
                cp["filter"][key] = repr(val)
        a = self.amr
        cp["amr"] = {
            "enabled": str(a.enabled).lower(), "max_level": str(a.max_level),
            "refine_fraction": repr(a.refine_fraction),
            "coarsen_fraction": repr(a.coarsen_fraction),
            "interval": str(a.interval), "initial_cycles": str(a.initial_cycles),
        }
        o = self.output
        cp["output"] = {
            "directory": o.directory, "formats": ", ".join(o.formats),
            "figures": str(o.figures).lower(), "history": str(o.history).lower(),
        }
        if o.dump_times:
            cp["output"]["dump_times"] = ", ".join(repr(t) for t in o.dump_times)
        if self.custom:
            cp["custom"] = {k: str(v) for k, v in self.custom.items()}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


class _Section:
    """Typed accessors with section.key diagnostics."""

    def __init__(self, cp: configparser.ConfigParser, name: str):
        self.name = name
        self.raw = dict(cp[name]) if cp.has_section(name) else {}

    def _fail(self, key, msg):
        raise ConfigError(f"{self.name}.{key}: {msg}")

    def get(self, key, default=None):
        return self.raw.pop(key, default)

    def get_str(self, key, default=None, choices=None):
        v = self.get(key, default)
        if v is None:
            return None
        v = str(v).strip().lower()
        if choices and v not in choices:
            self._fail(key, f"must be one of {sorted(choices)}, got {v!r}")
        return v

    def get_int(self, key, default=None, minimum=None):
        v = self.get(key, default)
        if v is None:
            return None
        try:
            iv = int(str(v).strip())
        except ValueError:
            self._fail(key, f"expected an integer, got {v!r}")
        if minimum is not None and iv < minimum:
            self._fail(key, f"must be >= {minimum}, got {iv}")
        return iv

    def get_float(self, key, default=None, positive=False):
        v = self.get(key, default)
        if v is None:
            return None
        try:
            fv = float(str(v).strip())
        except ValueError:
            self._fail(key, f"expected a number, got {v!r}")
        if positive and not fv > 0:
            self._fail(key, f"must be positive, got {fv}")
        return fv

    def get_bool(self, key, default=None):
        v = self.get(key, default)
        if v is None:
            return None
        if isinstance(v, bool):
            return v
        sv = str(v).strip().lower()
        if sv not in _BOOL:
            self._fail(key, f"expected a boolean, got {v!r}")
        return _BOOL[sv]

    def get_floats(self, key, default=()):
        v = self.get(key, None)
        if v is None:
            return tuple(default)
        try:
            return tuple(float(part) for part in str(v).replace(",", " ").split())
        except ValueError:
            self._fail(key, f"expected a list of numbers, got {v!r}")

    def reject_unknown(self):
        if self.raw:
            key = sorted(self.raw)[0]
            self._fail(key, "unknown key")


def parse_config(text: str, overrides=(), source="<config>") -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        target, value = item.split("=", 1)
        if "." not in target:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        sec, key = target.split(".", 1)
        sec, key = sec.strip(), key.strip()
        if not cp.has_section(sec):
            cp.add_section(sec)
        cp.set(sec, key, value.strip())

    for sec in cp.sections():
        if sec not in KNOWN_SECTIONS:
            raise ConfigError(f"{sec}: unknown section")

    run = _Section(cp, "run")
    benchmark = run.get_str("benchmark", choices={
        "solid_body_rotation", "isentropic_vortex", "sod", "explosion",
        "riemann2d", "custom"})
    if benchmark is None:
        raise ConfigError("run.benchmark: required key is missing")
    degree = run.get_int("degree", 1, minimum=1)
    scheme = run.get_str("scheme", "auto", choices={"auto", "ssp2", "ssp3"})
    solver = run.get_str("solver", "filtered",
                         choices={"filtered", "high_order", "low_order"})
    gamma = run.get_float("gamma", 1.4)
    if gamma is not None and gamma <= 1.0:
        raise ConfigError(f"run.gamma: must exceed 1, got {gamma}")
    run.reject_unknown()

    msec = _Section(cp, "mesh")
    nx = msec.get_int("nx", None, minimum=1)
    ny = msec.get_int("ny", None, minimum=1)
    msec.reject_unknown()

    tsec = _Section(cp, "time")
    time_mode = tsec.get_str("mode", "courant", choices={"courant", "fixed_dt"})
    courant = tsec.get_float("courant", 0.1, positive=True)
    dt = tsec.get_float("dt", None, positive=True)
    t_final = tsec.get_float("t_final", None, positive=True)
    if time_mode == "fixed_dt" and dt is None:
        raise ConfigError("time.dt: required when time.mode = fixed_dt")
    tsec.reject_unknown()

    fsec = _Section(cp, "filter")
    filt = FilterSettings(
        enabled=fsec.get_bool("enabled", True),
        function=fsec.get_str("function", "f1", choices={"f1", "f2"}),
        mode=fsec.get_str("mode", "relative", choices={"relative", "absolute"}),
        c0=fsec.get_float("c0", None, positive=True),
        beta=fsec.get_float("beta", None, positive=True),
        beta_rho=fsec.get_float("beta_rho", None, positive=True),
        beta_momentum=fsec.get_float("beta_momentum", None, positive=True),
        beta_energy=fsec.get_float("beta_energy", None, positive=True),
        denominator_floor=fsec.get_float("denominator_floor", 1e-8, positive=True),
        gauge=fsec.get_str("gauge", "increment", choices={"state", "increment"}),
        low_order=fsec.get_str("low_order", "subcell", choices={"subcell", "cell"}),
    )
    fsec.reject_unknown()
    if filt.enabled and solver == "filtered":
        if filt.mode == "absolute" and filt.c0 is None:
            raise ConfigError("filter.c0: required in absolute mode")

    asec = _Section(cp, "amr")
    amr = AmrSettings(
        enabled=asec.get_bool("enabled", False),
        max_level=asec.get_int("max_level", 2, minimum=0),
        refine_fraction=asec.get_float("refine_fraction", 0.2, positive=True),
        coarsen_fraction=asec.get_float("coarsen_fraction", 0.05, positive=True),
        interval=asec.get_int("interval", 5, minimum=1),
        initial_cycles=asec.get_int("initial_cycles", 3, minimum=0),
    )
    asec.reject_unknown()
    if amr.enabled and not amr.coarsen_fraction < amr.refine_fraction:
        raise ConfigError("amr.coarsen_fraction: must be below amr.refine_fraction")

    osec = _Section(cp, "output")
    formats_raw = osec.get("formats", "csv")
    formats = tuple(s.strip().lower() for s in str(formats_raw).split(",") if s.strip())
    for fmt in formats:
        if fmt not in ("csv", "vtk"):
            raise ConfigError(f"output.formats: unknown format {fmt!r}")
    output = OutputSettings(
        directory=str(osec.get("directory", "out")),
        formats=formats,
        figures=osec.get_bool("figures", True),
        history=osec.get_bool("history", True),
        dump_times=osec.get_floats("dump_times", ()),
    )
    osec.reject_unknown()

    csec = _Section(cp, "custom")
    custom = {}
    if benchmark == "custom" or csec.raw:
        custom["velocity_x"] = csec.get_float("velocity_x", 1.0)
        custom["velocity_y"] = csec.get_float("velocity_y", 0.0)
        custom["profile"] = csec.get_str("profile", "sine_x",
                                         choices={"sine_x", "sine_xy", "square"})
        custom["periodic"] = csec.get_bool("periodic", True)
        csec.reject_unknown()

    return RunConfig(
        benchmark=benchmark, degree=degree, scheme=scheme, solver=solver,
        gamma=gamma, nx=nx, ny=ny, time_mode=time_mode, courant=courant,
        dt=dt, t_final=t_final, filter=filt, amr=amr, output=output,
        custom=custom,
    )


def load_config(path: str, overrides=()) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config(text, overrides=overrides, source=path)


def filter_betas(cfg: RunConfig, names: tuple[str, ...]) -> dict[str, float]:
    """Per-variable beta map for the relative filter.

    Scalar runs use ``beta``; Euler runs use beta_rho / beta_momentum /
    beta_energy, each falling back to ``beta`` when present.
    """
    f = cfg.filter
    if "rho" in names:
        rho = f.beta_rho if f.beta_rho is not None else f.beta
        mom = f.beta_momentum if f.beta_momentum is not None else f.beta
        ene = f.beta_energy if f.beta_energy is not None else f.beta
        missing = [k for k, v in
                   (("beta_rho", rho), ("beta_momentum", mom), ("beta_energy", ene)) if v is None]
        if missing:
            raise ConfigError(f"filter.{missing[0]}: required for Euler relative filtering")
        return {"rho": rho, "mom_x": mom, "mom_y": mom, "energy": ene}
    if f.beta is None:
        raise ConfigError("filter.beta: required for scalar relative filtering")
    return {name: f.beta for name in names}
