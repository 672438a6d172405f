"""Flat sectioned configuration files.

Sections ``medium``, ``grid``, ``initial``, ``run`` and ``diagnostics``; one
``key = value`` per line; ``#`` and ``;`` start comment lines. Tuples are
comma separated. ``auto`` selects a value derived from the rest of the
configuration; the resolved file written next to every run spells all of
them out.
"""

from __future__ import annotations

import configparser
import hashlib
import re
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np

from .constitutive import ConstitutiveLaw
from .solver import GridSpec, InitialData, Scenario, cell_energy, init_state
from .diagnostics import space_integral
from .theorem import MediumParams, ParameterError, validate_params


class ConfigError(ValueError):
    pass


def _float(s: str) -> float:
    return float(s)


def _int(s: str) -> int:
    return int(s)


def _floats(s: str) -> tuple[float, ...]:
    return tuple(float(v) for v in s.split(",") if v.strip())


def _ints(s: str) -> tuple[int, ...]:
    return tuple(int(v) for v in s.split(",") if v.strip())


def _bool(s: str) -> bool:
    low = s.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _exact(s: str) -> Fraction:
    return Fraction(s.strip())


def _choice(*options: str) -> Callable[[str], str]:
    def parse(s: str) -> str:
        if s not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return s

    return parse


AUTO = "auto"

# section -> key -> (parser, default); a default of None marks a mandatory key
SCHEMA: dict[str, dict[str, tuple[Callable[[str], object], str | None]]] = {
    "medium": {
        "kind": (_choice("power_law", "constant_test"), "power_law"),
        "N": (_int, "2"),
        "m": (_exact, None),
        "n": (_exact, None),
        "p": (_exact, None),
        "d1": (_exact, "1"),
        "d2": (_exact, "1"),
        "d3": (_exact, AUTO),
        "eps_reg": (_float, "1e-12"),
        "a_const": (_float, "0"),
        "b_const": (_float, "1"),
        "w0_l1": (_exact, AUTO),
    },
    "grid": {
        "dim": (_int, "1"),
        "lower": (_floats, None),
        "upper": (_floats, None),
        "cells": (_ints, None),
    },
    "initial": {
        "shape": (_choice("cosine_bump", "gaussian_truncated"), "cosine_bump"),
        "center": (_floats, None),
        "radius": (_float, None),
        "amplitude": (_float, "1"),
        "mode": (_choice("E_only", "E_plus_H_right_mover"), "E_plus_H_right_mover"),
    },
    "run": {
        "t_end": (_float, None),
        "cfl": (_float, "0.5"),
        "outputs": (_int, "100"),
        "snapshot_every": (_int, "0"),
    },
    "diagnostics": {
        "threshold": (_float, "1e-10"),
        "fit_window": (_floats, AUTO),
        "envelope_tol": (_float, "0.05"),
        "front_K": (_float, "1"),
        "cutoff_s": (_float, AUTO),
        "cutoff_delta": (_float, AUTO),
        "residual_tol": (_float, "1e-3"),
        "l1_tol": (_float, "1e-6"),
        "energy_s": (_floats, AUTO),
        "energy_points": (_int, "41"),
        "replay_epsilon": (_float, "0.5"),
    },
}


@dataclass(frozen=True)
class ResolvedConfig:
    """Every key of :data:`SCHEMA` with its final string value and parsed value."""

    text: dict[str, dict[str, str]]
    values: dict[str, dict[str, object]]
    scenario: Scenario
    medium: MediumParams

    def get(self, dotted: str):
        section, key = dotted.split(".", 1)
        return self.values[section][key]

    def render(self) -> str:
        lines = []
        for section, keys in SCHEMA.items():
            lines.append(f"[{section}]")
            for key in keys:
                lines.append(f"{key} = {self.text[section][key]}")
            lines.append("")
        return "\n".join(lines)

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.render().encode()).hexdigest()


def _line_numbers(text: str) -> dict[tuple[str, str], int]:
    out: dict[tuple[str, str], int] = {}
    section = None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        m = re.match(r"^\[([^\]]+)\]$", line)
        if m:
            section = m.group(1).strip()
            continue
        m = re.match(r"^([^=:#;\s][^=:]*?)\s*[=:]", line)
        if m and section is not None:
            out.setdefault((section, m.group(1).strip()), no)
    return out


def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt_tuple(xs) -> str:
    return ", ".join(repr(v) for v in xs)


def parse_config(text: str, overrides: list[str] | None = None) -> ResolvedConfig:
    """Validate ``text`` plus ``section.key=value`` overrides into a scenario and medium."""
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"), inline_comment_prefixes=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    lines = _line_numbers(text)

    def where(section: str, key: str) -> str:
        no = lines.get((section, key))
        return f"line {no}" if no is not None else "--set"

    raw: dict[str, dict[str, str]] = {s: {} for s in SCHEMA}
    src: dict[tuple[str, str], str] = {}
    for section in cp.sections():
        if section not in SCHEMA:
            no = next((i for i, l in enumerate(text.splitlines(), 1) if l.strip() == f"[{section}]"), None)
            raise ConfigError(f"unknown section [{section}] (line {no})")
        for key, value in cp.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {section}.{key} ({where(section, key)})")
            raw[section][key] = value.strip()
            src[(section, key)] = where(section, key)
    for item in overrides or []:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        dotted, value = item.split("=", 1)
        section, key = (s.strip() for s in dotted.split(".", 1))
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"unknown key {section}.{key} (--set)")
        raw[section][key] = value.strip()
        src[(section, key)] = "--set"

    values: dict[str, dict[str, object]] = {s: {} for s in SCHEMA}
    for section, keys in SCHEMA.items():
        for key, (parser, default) in keys.items():
            given = raw[section].get(key)
            if given is None:
                if default is None:
                    raise ConfigError(f"missing mandatory key {section}.{key}")
                given = default
                raw[section][key] = default
            if given == AUTO:
                values[section][key] = AUTO
                continue
            try:
                values[section][key] = parser(given)
            except (ValueError, ZeroDivisionError) as exc:
                loc = src.get((section, key), "default")
                raise ConfigError(f"bad value for {section}.{key} ({loc}): {exc}") from None

    def fail(section: str, key: str, msg: str):
        loc = src.get((section, key), "default")
        raise ConfigError(f"{section}.{key} ({loc}): {msg}")

    md, gd, ind, rn, dg = (values[s] for s in SCHEMA)

    try:
        grid = GridSpec(gd["dim"], gd["lower"], gd["upper"], gd["cells"])
    except ValueError as exc:
        fail("grid", "cells", str(exc))
    try:
        initial = InitialData(ind["shape"], ind["center"], ind["radius"], ind["amplitude"], ind["mode"])
    except ValueError as exc:
        fail("initial", "center", str(exc))
    try:
        state0 = init_state(grid, initial)
    except ValueError as exc:
        fail("initial", "center", str(exc))

    if md["w0_l1"] == AUTO:
        w0 = space_integral(cell_energy(state0), grid)
        md["w0_l1"] = Fraction(repr(w0))
        raw["medium"]["w0_l1"] = repr(w0)
    d3 = None if md["d3"] == AUTO else md["d3"]
    try:
        medium = MediumParams(md["N"], md["m"], md["n"], md["p"], md["d1"], md["d2"], d3, md["w0_l1"])
    except ParameterError as exc:
        fail("medium", "N", str(exc))
    md["d3"] = medium.d3
    raw["medium"]["d3"] = str(medium.d3)
    report = validate_params(medium)
    if not report.admissible:
        failed = "; ".join(c.inequality for c in report.failed())
        fail("medium", "m", f"parameters not admissible: {failed}")

    try:
        law = ConstitutiveLaw(
            md["kind"], float(md["m"]), float(md["n"]), float(md["p"]), float(md["d1"]), float(md["d2"]),
            md["eps_reg"], md["a_const"], md["b_const"],
        )
    except ValueError as exc:
        fail("medium", "kind", str(exc))

    t_end = rn["t_end"]
    if rn["outputs"] < 1:
        fail("run", "outputs", "need at least one output interval")
    if rn["snapshot_every"] < 0:
        fail("run", "snapshot_every", "must be nonnegative")
    times = tuple(float(t) for t in np.linspace(0.0, t_end, rn["outputs"] + 1))
    try:
        scenario = Scenario(grid, law, initial, t_end, rn["cfl"], times, dg["threshold"])
    except ValueError as exc:
        fail("run", "t_end", str(exc))

    # derived diagnostics defaults
    xN = grid.lower[-1], grid.upper[-1]
    if dg["fit_window"] == AUTO:
        dg["fit_window"] = (0.1 * t_end, t_end)
    fw = dg["fit_window"]
    if len(fw) != 2 or not 0 <= fw[0] <= fw[1] or (t_end > 0 and not fw[0] < fw[1]):
        fail("diagnostics", "fit_window", "need two increasing nonnegative times")
    if dg["cutoff_s"] == AUTO:
        dg["cutoff_s"] = initial.center[-1]
    if dg["cutoff_delta"] == AUTO:
        dg["cutoff_delta"] = initial.radius
    if not dg["cutoff_delta"] > 0:
        fail("diagnostics", "cutoff_delta", "must be positive")
    if dg["energy_s"] == AUTO:
        dg["energy_s"] = (initial.center[-1], 0.5 * xN[1])
    s_lo, s_hi = dg["energy_s"] if len(dg["energy_s"]) == 2 else (None, None)
    if s_lo is None or not xN[0] <= s_lo < s_hi <= xN[1]:
        fail("diagnostics", "energy_s", f"need two increasing values inside [{xN[0]}, {xN[1]}]")
    if dg["energy_points"] < 3:
        fail("diagnostics", "energy_points", "need at least 3 points")
    if not 0 < dg["replay_epsilon"] < 1:
        fail("diagnostics", "replay_epsilon", "must lie in (0, 1)")

    text_out: dict[str, dict[str, str]] = {s: {} for s in SCHEMA}
    for section, keys in SCHEMA.items():
        for key in keys:
            v = values[section][key]
            if isinstance(v, tuple):
                text_out[section][key] = _fmt_tuple(v)
            elif isinstance(v, float):
                text_out[section][key] = _fmt(v)
            else:
                text_out[section][key] = str(v)
    return ResolvedConfig(text_out, values, scenario, medium)


PRESETS = ("p1_front", "p1_energy", "linear_baseline", "p3_exponents", "p1_tm2d")


def read_config_text(path_or_preset: str) -> str:
    """Contents of a config file, or of a bundled preset given by name."""
    p = Path(path_or_preset)
    if p.exists():
        return p.read_text()
    name = path_or_preset[:-4] if path_or_preset.endswith(".cfg") else path_or_preset
    if name in PRESETS:
        return resources.files("nlmaxwell").joinpath("presets", f"{name}.cfg").read_text()
    raise ConfigError(f"no config file or preset named {path_or_preset!r}")
