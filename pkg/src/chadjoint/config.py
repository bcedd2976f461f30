"""Line-oriented run configuration.

::

    [equation]
    lhs = u_t - u*u_x - 3*u_x*u_xx - u*u_xxx   # or: name = rosenau-hyman
    beta = 3                                 # optional parameter values

    [symmetry]
    xi_t = -t
    xi_x = 0
    eta = u

    [substitution]
    v = a + b*u^2

    [simulate]
    n = 16
    dt = 1e-3
    t_end = 0.5
    u0 = 1 + 0.01*cos(x)
    monitor.mass = u
    monitor.cubic = u^3
    output = rh.csv

Expression values use the polynomial grammar; ``u0`` and the numeric grid
keys are plain numbers or numeric profiles.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .algebra import DiffPoly
from .conslaw import Symmetry
from .equations import NAMED, EquationSpec
from .numerics import Grid, profile
from .syntax import ParseError, parse

SECTIONS = ("equation", "symmetry", "substitution", "simulate")
_PARAMS = ("eps", "alpha", "beta", "kappa")


class ConfigError(ValueError):
    def __init__(self, message: str, source: str | None = None, line: int | None = None):
        self.source = source
        self.line = line
        where = f"{source or '<config>'}:{line}: " if line else (f"{source}: " if source else "")
        super().__init__(where + message)


@dataclass
class SimulateConfig:
    grid: Grid
    u0: str
    monitors: dict = field(default_factory=dict)  # name -> DiffPoly
    output: str | None = None


@dataclass
class RunConfig:
    equation: EquationSpec | None = None
    symmetry: Symmetry | None = None
    substitution: DiffPoly | None = None
    simulate: SimulateConfig | None = None


def read_sections(text: str, source: str | None = None) -> dict:
    """{section: {key: (value, line number)}}"""
    out: dict = {}
    current = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"\[([a-z_]+)\]", line)
        if m:
            current = m.group(1)
            if current not in SECTIONS:
                raise ConfigError(f"unknown section [{current}]", source, no)
            if current in out:
                raise ConfigError(f"duplicate section [{current}]", source, no)
            out[current] = {}
            continue
        if current is None:
            raise ConfigError("key outside of a section", source, no)
        if "=" not in line:
            raise ConfigError("expected 'key = value'", source, no)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key or not value:
            raise ConfigError("empty key or value", source, no)
        if key in out[current]:
            raise ConfigError(f"duplicate key {key!r}", source, no)
        out[current][key] = (value, no)
    return out


def _expr(value: str, source, line) -> DiffPoly:
    try:
        return parse(value, source=f"{source or '<config>'}:{line}")
    except ParseError as exc:
        raise ConfigError(str(exc)) from None


def equation_from_section(sec: dict, source=None) -> EquationSpec:
    values = {}
    for key, (val, no) in sec.items():
        if key in _PARAMS:
            try:
                values[key] = Fraction(val)
            except ValueError:
                raise ConfigError(f"{key} must be a rational number", source, no) from None
        elif key not in ("lhs", "name"):
            raise ConfigError(f"unknown equation key {key!r}", source, no)
    if ("lhs" in sec) == ("name" in sec):
        raise ConfigError("[equation] needs exactly one of 'lhs' or 'name'", source)
    if "name" in sec:
        name, no = sec["name"]
        if name not in NAMED:
            raise ConfigError(f"unknown equation name {name!r}; known: {', '.join(NAMED)}", source, no)
        eq = NAMED[name]()
    else:
        val, no = sec["lhs"]
        eq = EquationSpec.from_lhs(_expr(val, source, no))
    return eq.specialize(**values) if values else eq


def symmetry_from_section(sec: dict, source=None) -> Symmetry:
    parts = {}
    for key, (val, no) in sec.items():
        if key not in ("xi_t", "xi_x", "eta"):
            raise ConfigError(f"unknown symmetry key {key!r}", source, no)
        parts[key] = _expr(val, source, no)
    try:
        return Symmetry.of(**parts)
    except ValueError as exc:
        raise ConfigError(str(exc), source) from None


def _number(val: str, kind, source, no):
    try:
        if kind is int:
            return int(val)
        return float(profile(val)(0.0))  # allows 2*pi
    except Exception:
        raise ConfigError(f"expected a number, got {val!r}", source, no) from None


def simulate_from_section(sec: dict, source=None) -> SimulateConfig:
    grid_kw, monitors = {}, {}
    u0, output = None, None
    kinds = {"n": int, "save_every": int, "length": float, "dt": float, "t_end": float,
             "max_amplitude": float}
    for key, (val, no) in sec.items():
        if key in kinds:
            grid_kw[key] = _number(val, kinds[key], source, no)
        elif key == "u0":
            u0 = val
        elif key == "output":
            output = val
        elif key.startswith("monitor."):
            monitors[key[len("monitor."):]] = _expr(val, source, no)
        else:
            raise ConfigError(f"unknown simulate key {key!r}", source, no)
    if u0 is None:
        raise ConfigError("[simulate] needs u0", source)
    try:
        grid = Grid(**grid_kw)
    except ValueError as exc:
        raise ConfigError(str(exc), source) from None
    return SimulateConfig(grid, u0, monitors, output)


def parse_config(text: str, source: str | None = None) -> RunConfig:
    secs = read_sections(text, source)
    cfg = RunConfig()
    if "equation" in secs:
        cfg.equation = equation_from_section(secs["equation"], source)
    if "symmetry" in secs:
        cfg.symmetry = symmetry_from_section(secs["symmetry"], source)
    if "substitution" in secs:
        sub = secs["substitution"]
        extra = set(sub) - {"v"}
        if extra:
            raise ConfigError(f"unknown substitution key {sorted(extra)[0]!r}", source)
        if "v" in sub:
            cfg.substitution = _expr(*sub["v"][:1], source, sub["v"][1])
    if "simulate" in secs:
        cfg.simulate = simulate_from_section(secs["simulate"], source)
    return cfg


def load_config(path: str | Path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="ascii")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}", str(p)) from None
    return parse_config(text, str(p))


__all__ = ["ConfigError", "RunConfig", "SimulateConfig", "parse_config", "load_config", "read_sections"]
