"""``key = value`` run configuration on top of a named preset.

Example::

    # droplet on a hydrophobic wall
    preset = droplet-angle
    beta = 2*pi/3
    cells = 96
    t_end = 0.05

Blank lines and ``#`` comments are ignored.  Every key is optional except
``preset``; unknown keys are errors.  A preset that sweeps over a key
(``cells``, ``beta`` or ``mobility``) accepts a comma list for that key,
which replaces the swept values.
"""

from __future__ import annotations

import math
import re
from dataclasses import replace
from pathlib import Path

from ..model import DoubleWell, Logarithmic, ModelParams, WettingParams
from .scenarios import (
    PRESET_NAMES,
    Scenario,
    UnknownScenario,
    mobility_from_name,
    preset,
    schedule_from_name,
)

KEYS = (
    "preset",
    "dim",
    "domain",
    "cells",
    "dt",
    "t_end",
    "epsilon",
    "potential",
    "theta",
    "theta_c",
    "mobility",
    "m0",
    "wetting",
    "beta",
    "seed",
    "schedule",
    "strict",
    "snapshots",
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int = None, key: str = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.key = key


class ValidationError(ValueError):
    pass


_PI = re.compile(r"^\s*(?:([-+]?[\d.eE+-]+)\s*\*\s*)?pi(?:\s*/\s*([\d.eE+-]+))?\s*$")


def parse_number(text: str) -> float:
    """Float, or a multiple of ``pi`` written as ``pi``, ``2*pi/3``, ``pi/4``."""
    m = _PI.match(text)
    if m:
        a = float(m.group(1)) if m.group(1) else 1.0
        b = float(m.group(2)) if m.group(2) else 1.0
        return a * math.pi / b
    return float(text)


def _numbers(text):
    return [parse_number(t) for t in text.split(",") if t.strip()]


def _flag(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected on/off, got {text!r}")


def read_pairs(text: str) -> dict:
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ParseError(f"unknown key {key!r}", lineno, key)
        if key in pairs:
            raise ParseError(f"duplicate key {key!r}", lineno, key)
        if not value:
            raise ParseError(f"empty value for {key!r}", lineno, key)
        pairs[key] = (value, lineno)
    return pairs


def apply_overrides(sc: Scenario, pairs: dict) -> Scenario:
    """Apply ``{key: (text, line)}`` overrides to ``sc``.

    Raises
    ------
    ParseError
        A value cannot be read.
    ValidationError
        The resulting scenario violates an invariant.
    """
    upd = {}
    model = sc.model
    pot_kw = {}
    wet_kw = {}
    for key, (value, lineno) in pairs.items():
        if key == "preset":
            continue
        try:
            if key == "dim":
                upd["dim"] = int(value)
            elif key == "domain":
                upd["domain"] = tuple(_numbers(value))
            elif key == "cells":
                counts = [int(v) for v in _numbers(value)]
                if any(c != n for c, n in zip(counts, _numbers(value))):
                    raise ValueError("cell counts must be integers")
                upd["cells"] = counts
            elif key in ("dt", "t_end", "epsilon", "m0", "beta", "theta", "theta_c"):
                vals = _numbers(value)
                if key == "beta" and sc.sweep_key == "beta":
                    upd["beta"] = vals
                elif len(vals) != 1:
                    raise ValueError("expected a single number")
                elif key in ("theta", "theta_c"):
                    pot_kw[key] = vals[0]
                else:
                    upd[key] = vals[0]
            elif key == "potential":
                if value not in ("double_well", "log"):
                    raise ValueError("potential is double_well or log")
                pot_kw["kind"] = value
            elif key == "mobility":
                names = [v.strip() for v in value.split(",") if v.strip()]
                for n in names:
                    mobility_from_name(n)
                upd["mobility"] = names
            elif key == "wetting":
                wet_kw["enabled"] = _flag(value)
            elif key == "seed":
                upd["seed"] = int(value)
            elif key == "schedule":
                upd["schedule"] = schedule_from_name(value)
            elif key == "strict":
                upd["strict"] = _flag(value)
            elif key == "snapshots":
                upd["snapshot_times"] = tuple(_numbers(value))
        except ValueError as exc:
            raise ParseError(f"bad value for {key!r}: {exc}", lineno, key) from None

    try:
        return _rebuild(sc, model, upd, pot_kw, wet_kw)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


def _rebuild(sc, model, upd, pot_kw, wet_kw):
    if pot_kw:
        kind = pot_kw.get("kind", "log" if model.potential.singular else "double_well")
        if kind == "double_well":
            if "theta" in pot_kw or "theta_c" in pot_kw:
                raise ValueError("theta/theta_c only apply to the log potential")
            potential = DoubleWell()
        else:
            cur = model.potential if model.potential.singular else Logarithmic(0.3, 1.0)
            potential = Logarithmic(pot_kw.get("theta", cur.theta), pot_kw.get("theta_c", cur.theta_c))
        model = replace(model, potential=potential)
    if "m0" in upd:
        model = replace(model, mobility=type(model.mobility)(upd.pop("m0")))
    if "epsilon" in upd:
        model = replace(model, epsilon=upd.pop("epsilon"))

    sweep_key, sweep_values = sc.sweep_key, sc.sweep_values
    if "mobility" in upd:
        names = upd.pop("mobility")
        if sweep_key == "mobility":
            sweep_values = tuple(names)
        elif len(names) != 1:
            raise ValueError("mobility takes a single value for this preset")
        model = replace(model, mobility=mobility_from_name(names[0], model.mobility.m0))

    wetting = model.wetting
    beta = upd.pop("beta", None)
    if beta is not None and sweep_key == "beta":
        sweep_values = tuple(beta)
        beta = beta[0]
    if wet_kw or beta is not None:
        enabled = wet_kw.get("enabled", wetting.enabled)
        wetting = WettingParams(wetting.beta if beta is None else beta, enabled, wetting.walls)
        if sweep_key == "beta" and enabled:
            for b in sweep_values:
                WettingParams(b, True, wetting.walls)
        model = replace(model, wetting=wetting)
    ModelParams(model.potential, model.mobility, model.epsilon, model.wetting)

    dim = upd.get("dim", sc.dim)
    if "cells" in upd:
        counts = upd.pop("cells")
        if sweep_key == "cells":
            # one per-axis count per resolution
            sweep_values = tuple(counts)
            upd["cells"] = (counts[-1],) * dim
        elif len(counts) == 1:
            upd["cells"] = (counts[0],) * dim
        else:
            upd["cells"] = tuple(counts)
    if dim != sc.dim and ("domain" not in upd or "cells" not in upd):
        raise ValueError("changing dim requires domain and cells as well")
    return replace(sc, model=model, sweep_key=sweep_key, sweep_values=sweep_values, **upd)


def parse_config_text(text: str, desk: bool = False) -> Scenario:
    pairs = read_pairs(text)
    if "preset" not in pairs:
        raise ParseError("config must name a preset", None, "preset")
    name, lineno = pairs["preset"]
    if name not in PRESET_NAMES:
        raise ParseError(f"unknown preset {name!r}; known: {', '.join(PRESET_NAMES)}", lineno, "preset")
    try:
        base = preset(name, desk)
    except UnknownScenario as exc:  # pragma: no cover - guarded above
        raise ParseError(str(exc), lineno, "preset") from None
    return apply_overrides(base, pairs)


def parse_config(path, desk: bool = False) -> Scenario:
    """Read a config file into a :class:`Scenario`."""
    return parse_config_text(Path(path).read_text(), desk)
