"""INI experiment configs with typed values and strict validation.

The format is deliberately plain: flat sections, `key = value` pairs,
no expression language.  Values are parsed into bool, int, float,
bracketed lists of those, or strings; anything structured beyond that
(test functions, generators) is named by a registry id plus numeric
parameters, so a config never carries code.

Example::

    [experiment]
    kind = solve

    [orlicz]
    kind = piecewise_linear
    breakpoints = [1.0]
    slopes = [1.0, 2.0]

    [domain]
    shape = box
    lo = -1.0
    hi = 1.0
    cells = 4096

    [function]
    name = poly
    coeffs = [0.0, 0.0, 1.0]

    [space]
    n = 1
    m = 1

    [opts]
    tol = 1e-4
    seed = 0
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .domains import QuadDomain
from .generators import GENERATOR_KINDS, OrliczFunction, make_generator
from .registry import make_function

EXPERIMENTS = (
    "solve",
    "extend",
    "local_converge",
    "verify_core",
    "continuity",
)


def parse_value(text):
    """Typed scalar or bracketed list; falls back to the raw string."""
    t = text.strip()
    if t.lower() == "true":
        return True
    if t.lower() == "false":
        return False
    if t.startswith("[") and t.endswith("]"):
        inner = t[1:-1].strip()
        if not inner:
            return []
        return [parse_value(part) for part in inner.split(",")]
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        pass
    return t


def _typed_section(parser, name):
    if name not in parser:
        return {}
    return {key: parse_value(raw) for key, raw in parser[name].items()}


@dataclass
class ExperimentConfig:
    """Validated experiment description, sections already typed."""

    experiment: str
    orlicz: dict = field(default_factory=dict)
    domain: dict = field(default_factory=dict)
    function: dict = field(default_factory=dict)
    space: dict = field(default_factory=dict)
    opts: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    extra_functions: dict = field(default_factory=dict)

    @property
    def degree(self):
        return int(self.space.get("m", 0))

    @property
    def dim(self):
        return int(self.space.get("n", 1))


def load_config(path):
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found or unreadable: {path}", field=str(path))
    exp_section = _typed_section(parser, "experiment")
    kind = exp_section.get("kind")
    if kind is None:
        raise ConfigError("missing experiment kind", field="experiment.kind")
    kind = str(kind).replace("-", "_")
    if kind not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment kind {kind!r}; known: {', '.join(EXPERIMENTS)}",
            field="experiment.kind",
        )
    extra = {
        name.split(".", 1)[1]: _typed_section(parser, name)
        for name in parser.sections()
        if name.startswith("function.")
    }
    return ExperimentConfig(
        experiment=kind,
        orlicz=_typed_section(parser, "orlicz"),
        domain=_typed_section(parser, "domain"),
        function=_typed_section(parser, "function"),
        space=_typed_section(parser, "space"),
        opts=_typed_section(parser, "opts"),
        output=_typed_section(parser, "output"),
        extra_functions=extra,
    )


def _as_float_list(value):
    return [float(v) for v in np.atleast_1d(value)]


def build_orlicz(section):
    """OrliczFunction from an [orlicz] section."""
    section = dict(section)
    kind = section.pop("kind", None)
    if kind is None:
        raise ConfigError("missing generator kind", field="orlicz.kind")
    if kind not in GENERATOR_KINDS:
        raise ConfigError(
            f"unknown generator kind {kind!r}; known: {sorted(GENERATOR_KINDS)}",
            field="orlicz.kind",
        )
    wrapper = {}
    for key in ("lambda_phi", "lambda_psi_minus", "lambda_psi_plus"):
        if key in section:
            wrapper[key] = float(section.pop(key))
    lo = section.pop("eval_lo", None)
    hi = section.pop("eval_hi", None)
    if (lo is None) != (hi is None):
        raise ConfigError(
            "eval_lo and eval_hi must be given together", field="orlicz.eval_lo"
        )
    if lo is not None:
        wrapper["eval_range"] = (float(lo), float(hi))
    if "grid_points" in section:
        wrapper["grid_points"] = int(section.pop("grid_points"))
    list_keys = {"breakpoints", "slopes", "coeffs", "exponents", "s", "psi"}
    params = {
        key: (_as_float_list(val) if key in list_keys else val)
        for key, val in section.items()
    }
    try:
        gen = make_generator(kind, **params)
        return OrliczFunction(gen, **wrapper)
    except TypeError as exc:
        # name the missing/unexpected parameter when the message carries it
        match = re.search(r"argument:? '(\w+)'", str(exc))
        field = f"orlicz.{match.group(1)}" if match else "orlicz"
        raise ConfigError(f"bad generator parameters: {exc}", field=field) from exc
    except (ValueError, ArithmeticError) as exc:
        raise ConfigError(str(exc), field="orlicz") from exc


def build_domain(section, resolution=None):
    """QuadDomain from a [domain] section; ``resolution`` overrides cells."""
    section = dict(section)
    shape = section.pop("shape", None)
    if shape is None:
        raise ConfigError("missing domain shape", field="domain.shape")
    cells = section.pop("cells", None)
    if resolution is not None:
        cells = int(resolution)
    try:
        if shape == "box":
            lo = section.pop("lo", -1.0)
            hi = section.pop("hi", 1.0)
            if section:
                raise ConfigError(
                    f"unknown domain key(s): {sorted(section)}", field="domain"
                )
            return QuadDomain.box(lo, hi, cells)
        if shape == "ball":
            center = section.pop("center", 0.0)
            radius = float(section.pop("radius", 1.0))
            if section:
                raise ConfigError(
                    f"unknown domain key(s): {sorted(section)}", field="domain"
                )
            return QuadDomain.ball(np.atleast_1d(center).astype(float), radius, cells)
    except ConfigError:
        raise
    except (ValueError, ArithmeticError) as exc:
        raise ConfigError(str(exc), field="domain") from exc
    raise ConfigError(f"unknown domain shape {shape!r}", field="domain.shape")


def build_function(section, field_name="function"):
    """TestFunction from a [function] section (registry id + parameters)."""
    section = dict(section)
    name = section.pop("name", None)
    if name is None:
        raise ConfigError("missing function name", field=f"{field_name}.name")
    kwargs = {
        key: (tuple(val) if isinstance(val, list) else val)
        for key, val in section.items()
    }
    try:
        return make_function(str(name), **kwargs)
    except ConfigError:
        raise
    except (ValueError, ArithmeticError) as exc:
        raise ConfigError(str(exc), field=field_name) from exc
