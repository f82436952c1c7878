"""Scenario files: INI-style ``[section]`` / ``key = value`` text.

Example::

    [grid]
    cells = 200
    x_min = 0
    x_max = 10
    boundary = reflective

    [layers]
    count = 3
    fractions = uniform

    [topography]
    kind = gaussian_bump
    amplitude = 0.3
    width = 0.7
    center = 5

    [initial]
    kind = lake_at_rest
    surface = 1.0

    [run]
    end_time = 1.0

Unknown sections or keys are errors, so typos do not pass silently.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import FlowState, Grid1D, LayerPartition, PhysicalParams, Topography
from .viscous import VISCOUS_MODES, ViscousConfig

TOPOGRAPHY_KINDS = ("flat", "gaussian_bump", "hat_bump")
INITIAL_KINDS = ("lake_at_rest", "dam_break", "shear")

_SCHEMA = {
    "grid": {"cells", "x_min", "x_max", "boundary"},
    "layers": {"count", "fractions"},
    "physics": {"g", "mu", "k_l", "k_t", "cfl_safety", "dry_tol", "dt_max", "viscous_mode", "parabolic_safety", "energy_constant"},
    "topography": {"kind", "amplitude", "width", "center"},
    "initial": {"kind", "surface", "h_left", "h_right", "split", "velocities", "hump_amplitude", "hump_width", "hump_center"},
    "run": {"end_time", "max_steps", "output_every", "output", "dt"},
}


class ConfigError(ValueError):
    """Invalid scenario file; the message names the file, line, section and key."""


@dataclass(frozen=True)
class ScenarioConfig:
    grid: Grid1D
    layers: LayerPartition
    params: PhysicalParams
    viscous: ViscousConfig
    topography: Topography
    initial: FlowState
    end_time: float
    max_steps: int | None = None
    output_every: int = 1
    output: str = "output"
    forced_dt: float | None = None
    energy_constant: float = 1.0
    resolved: dict = field(default_factory=dict, compare=False)
    source: str = "<string>"

    def refined(self, factor: int) -> "ScenarioConfig":
        """Same scenario on a grid with ``factor`` times more cells."""
        raw = {s: dict(v) for s, v in self.resolved.items()}
        raw["grid"]["cells"] = str(int(raw["grid"]["cells"]) * factor)
        if "dt" in raw.get("run", {}):
            raw["run"]["dt"] = repr(float(raw["run"]["dt"]) / factor)
        return _build(raw, {}, self.source)


def _key_lines(text: str) -> dict:
    lines, section = {}, None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        m = re.match(r"\[([^\]]+)\]", stripped)
        if m:
            section = m.group(1).strip().lower()
            lines.setdefault((section, None), lineno)
            continue
        m = re.match(r"([^=:#;\s][^=:]*?)\s*[=:]", stripped)
        if m and section is not None:
            lines[(section, m.group(1).strip().lower())] = lineno
    return lines


class _Reader:
    def __init__(self, raw, lines, source):
        self.raw, self.lines, self.source = raw, lines, source

    def where(self, section, key=None):
        line = self.lines.get((section, key)) or self.lines.get((section, None))
        loc = f"{self.source}:{line}" if line else self.source
        return f"{loc}: [{section}]" + (f" {key}" if key else "")

    def fail(self, section, key, message):
        raise ConfigError(f"{self.where(section, key)}: {message}")

    def has(self, section, key):
        return key in self.raw.get(section, {})

    def text(self, section, key, default=None):
        if not self.has(section, key):
            if default is None:
                self.fail(section, key, "required key is missing")
            return default
        return self.raw[section][key].strip()

    def number(self, section, key, default=None, kind=float):
        if not self.has(section, key):
            if default is None:
                self.fail(section, key, "required key is missing")
            return default
        value = self.raw[section][key].strip()
        try:
            out = kind(value)
        except ValueError:
            self.fail(section, key, f"expected {'an integer' if kind is int else 'a number'}, got {value!r}")
        if kind is float and not np.isfinite(out):
            self.fail(section, key, f"value must be finite, got {value!r}")
        return out

    def numbers(self, section, key):
        value = self.text(section, key)
        try:
            return [float(v) for v in value.replace(",", " ").split()]
        except ValueError:
            self.fail(section, key, f"expected a list of numbers, got {value!r}")


def parse_config(text: str, source: str = "<string>") -> ScenarioConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    raw = {s.lower(): {k.lower(): v for k, v in parser.items(s)} for s in parser.sections()}
    return _build(raw, _key_lines(text), source)


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read scenario file ({exc.strerror})") from None
    return parse_config(text, str(path))


def _build(raw: dict, lines: dict, source: str) -> ScenarioConfig:
    r = _Reader(raw, lines, source)
    for section, keys in raw.items():
        if section not in _SCHEMA:
            r.fail(section, None, f"unknown section; expected one of {sorted(_SCHEMA)}")
        for key in keys:
            if key not in _SCHEMA[section]:
                r.fail(section, key, f"unknown key; expected one of {sorted(_SCHEMA[section])}")

    cells = r.number("grid", "cells", kind=int)
    if cells < 1:
        r.fail("grid", "cells", "must be at least 1")
    x_min, x_max = r.number("grid", "x_min", 0.0), r.number("grid", "x_max", 1.0)
    if not x_max > x_min:
        r.fail("grid", "x_max", "must exceed x_min")
    boundary = r.text("grid", "boundary", "reflective").lower()
    if boundary not in ("periodic", "reflective"):
        r.fail("grid", "boundary", f"must be periodic or reflective, got {boundary!r}")
    grid = Grid1D.uniform(cells, x_min, x_max, boundary)

    count = r.number("layers", "count", 1, kind=int)
    if count < 1:
        r.fail("layers", "count", "must be at least 1")
    if r.text("layers", "fractions", "uniform").lower() == "uniform":
        layers = LayerPartition.uniform(count)
    else:
        fr = r.numbers("layers", "fractions")
        if len(fr) != count:
            r.fail("layers", "fractions", f"expected {count} values, got {len(fr)}")
        try:
            layers = LayerPartition(fr)
        except ValueError as exc:
            r.fail("layers", "fractions", str(exc))

    defaults = PhysicalParams()
    kwargs = {}
    for key in ("g", "mu", "k_l", "k_t", "cfl_safety", "dry_tol", "dt_max"):
        kwargs[key] = r.number("physics", key, getattr(defaults, key))
    try:
        params = PhysicalParams(**kwargs)
    except ValueError as exc:
        m = re.search(r"parameter (\w+)=", str(exc))
        r.fail("physics", m.group(1) if m else None, str(exc))
    mode = r.text("physics", "viscous_mode", "as_written")
    if mode not in VISCOUS_MODES:
        r.fail("physics", "viscous_mode", f"must be one of {VISCOUS_MODES}, got {mode!r}")
    safety = r.number("physics", "parabolic_safety", 0.5)
    if not 0 < safety <= 1:
        r.fail("physics", "parabolic_safety", "must lie in (0, 1]")
    viscous = ViscousConfig(mode, safety)
    energy_constant = r.number("physics", "energy_constant", 1.0)
    if energy_constant < 0:
        r.fail("physics", "energy_constant", "must be non-negative")

    topo = _topography(r, grid)
    initial = _initial(r, grid, topo, layers, params)

    end_time = r.number("run", "end_time")
    if end_time < 0:
        r.fail("run", "end_time", "must be non-negative")
    max_steps = r.number("run", "max_steps", -1, kind=int) if r.has("run", "max_steps") else None
    if max_steps is not None and max_steps < 0:
        r.fail("run", "max_steps", "must be non-negative")
    output_every = r.number("run", "output_every", 1, kind=int)
    if output_every < 1:
        r.fail("run", "output_every", "must be at least 1")
    forced_dt = r.number("run", "dt") if r.has("run", "dt") else None
    if forced_dt is not None and not forced_dt > 0:
        r.fail("run", "dt", "must be positive")

    return ScenarioConfig(
        grid=grid,
        layers=layers,
        params=params,
        viscous=viscous,
        topography=topo,
        initial=initial,
        end_time=end_time,
        max_steps=max_steps,
        output_every=output_every,
        output=r.text("run", "output", "output"),
        forced_dt=forced_dt,
        energy_constant=energy_constant,
        resolved=_resolve(raw, grid, layers, params, viscous, energy_constant),
        source=source,
    )


def _topography(r: _Reader, grid: Grid1D) -> Topography:
    kind = r.text("topography", "kind", "flat").lower()
    if kind not in TOPOGRAPHY_KINDS:
        r.fail("topography", "kind", f"must be one of {TOPOGRAPHY_KINDS}, got {kind!r}")
    if kind == "flat":
        return Topography.flat(grid.cell_count)
    x = grid.centers
    amp = r.number("topography", "amplitude")
    width = r.number("topography", "width")
    if not width > 0:
        r.fail("topography", "width", "must be positive")
    center = r.number("topography", "center", 0.5 * (grid.edges[0] + grid.edges[-1]))
    if kind == "gaussian_bump":
        return Topography(amp * np.exp(-(((x - center) / width) ** 2)))
    return Topography(amp * np.maximum(1.0 - np.abs(x - center) / width, 0.0))


def _initial(r: _Reader, grid, topo, layers, params) -> FlowState:
    kind = r.text("initial", "kind").lower()
    if kind not in INITIAL_KINDS:
        r.fail("initial", "kind", f"must be one of {INITIAL_KINDS}, got {kind!r}")
    x, z = grid.centers, topo.z_b
    if kind == "dam_break":
        split = r.number("initial", "split", 0.5 * (grid.edges[0] + grid.edges[-1]))
        left, right = r.number("initial", "h_left"), r.number("initial", "h_right")
        if left < 0 or right < 0:
            r.fail("initial", "h_left" if left < 0 else "h_right", "must be non-negative")
        level = np.where(x < split, left, right)
    else:
        level = np.full_like(x, r.number("initial", "surface"))
    if r.has("initial", "hump_amplitude"):
        if kind == "lake_at_rest":
            r.fail("initial", "hump_amplitude", "lake_at_rest has a flat surface")
        width = r.number("initial", "hump_width")
        if not width > 0:
            r.fail("initial", "hump_width", "must be positive")
        center = r.number("initial", "hump_center", 0.5 * (grid.edges[0] + grid.edges[-1]))
        level = level + r.number("initial", "hump_amplitude") * np.exp(-(((x - center) / width) ** 2))
    h = np.maximum(level - z, 0.0)

    u = np.zeros((layers.count, x.size))
    if r.has("initial", "velocities"):
        if kind == "lake_at_rest":
            r.fail("initial", "velocities", "lake_at_rest has zero velocity")
        vel = r.numbers("initial", "velocities")
        if len(vel) != layers.count:
            r.fail("initial", "velocities", f"expected {layers.count} values, got {len(vel)}")
        u[:] = np.asarray(vel)[:, None]
    elif kind == "shear":
        r.fail("initial", "velocities", "required key is missing")
    return FlowState.from_velocities(h, u, layers, params.dry_tol)


def _resolve(raw, grid, layers, params, viscous, energy_constant) -> dict:
    # every key with defaults filled in, as echoed in output headers
    out = {s: dict(v) for s, v in raw.items()}
    out.setdefault("grid", {}).update(
        cells=str(grid.cell_count), x_min=repr(float(grid.edges[0])), x_max=repr(float(grid.edges[-1])), boundary=grid.boundary
    )
    out.setdefault("layers", {}).update(count=str(layers.count), fractions=" ".join(repr(float(v)) for v in layers.fractions))
    phys = out.setdefault("physics", {})
    for key in ("g", "mu", "k_l", "k_t", "cfl_safety", "dry_tol", "dt_max"):
        phys[key] = repr(float(getattr(params, key)))
    phys.update(viscous_mode=viscous.mode, parabolic_safety=repr(viscous.parabolic_safety), energy_constant=repr(energy_constant))
    out.setdefault("topography", {}).setdefault("kind", "flat")
    out.setdefault("run", {})
    return {s: dict(sorted(v.items())) for s, v in sorted(out.items())}
