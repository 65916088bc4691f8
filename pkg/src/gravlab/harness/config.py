"""INI scenario files.

Layout::

    [scenario]
    name = interferometer-pair
    model = eft
    geometry = approximate        ; scenario-specific options

    [physical]                    ; SI units, angular frequencies in rad/s
    m = 1e-12

    [numerics]
    seed = 7

    [output]
    format = csv                  ; csv or jsonl
    path = out.csv                ; omit for stdout

    [constants]                   ; optional overrides
    G_N = 6.674e-11

Unknown keys are rejected. ``GRAVLAB_SEED`` and ``GRAVLAB_OUT`` in the
environment override the seed and the output path.
"""
from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field, replace
from typing import Any, Mapping

from ..errors import ConfigError, InvalidInputError
from ..quantities import CONSTANTS, PhysicalConstants

SCENARIOS = ("osc-pair", "interferometer-pair", "dp-rate", "penrose", "cc-trajectories", "estimates")
MODELS = ("eft", "sn", "classical-channel", "diosi-penrose", "penrose")
FORMATS = ("csv", "jsonl")

COMPATIBLE = {
    "osc-pair": ("eft",),
    "interferometer-pair": ("eft", "sn", "classical-channel"),
    "dp-rate": ("diosi-penrose",),
    "penrose": ("penrose",),
    "cc-trajectories": ("classical-channel",),
    "estimates": ("eft",),
}

AMU = CONSTANTS.amu


def _pos(x):
    x = float(x)
    if not x > 0:
        raise ValueError("must be positive")
    return x


def _nonneg(x):
    x = float(x)
    if not x >= 0:
        raise ValueError("must be non-negative")
    return x


def _count(x):
    f = float(x)
    if f != int(f) or f < 1:
        raise ValueError("must be a positive integer")
    return int(f)


def _count0(x):
    f = float(x)
    if f != int(f) or f < 0:
        raise ValueError("must be a non-negative integer")
    return int(f)


def _seed(x):
    v = int(str(x), 0)
    if not 0 <= v < 2 ** 64:
        raise ValueError("must fit in 64 bits")
    return v


def _bool(x):
    s = str(x).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError("must be a boolean")


def _choice(*options):
    def parse(x):
        s = str(x).strip()
        if s not in options:
            raise ValueError(f"must be one of {options}")
        return s
    return parse


# per scenario: section -> key -> (parser, default)
SCHEMA: dict[str, dict[str, dict[str, tuple]]] = {
    "osc-pair": {
        "scenario": {},
        "physical": {"m": (_pos, 1e-12), "omega": (_pos, 1.0), "d": (_pos, 1e-6),
                     "t": (_pos, 1.0), "alpha": (_nonneg, 0.0)},
        "numerics": {"dim": (_count, 12), "rwa": (_bool, True), "seed": (_seed, 0)},
    },
    "interferometer-pair": {
        "scenario": {"geometry": (_choice("approximate", "collinear"), "approximate")},
        "physical": {"m": (_pos, 1e-12), "dx": (_pos, 1e-6), "d": (_pos, 1e-3), "dt": (_pos, 1.0)},
        "numerics": {"seed": (_seed, 0), "gamma": (_nonneg, 1e-3), "n_steps": (_count, 100),
                     "n_traj": (_count, 1000), "R0": (_nonneg, 0.0),
                     "estimator": (_choice("ideal", "noisy"), "ideal"), "tau": (_nonneg, 0.0)},
    },
    "dp-rate": {
        "scenario": {},
        "physical": {"m": (_pos, 1e5 * AMU), "R0": (_pos, 1e-20), "separation": (_nonneg, 1e-18)},
        "numerics": {"seed": (_seed, 0), "mc_samples": (_count0, 0)},
    },
    "penrose": {
        "scenario": {"prefactor": (_choice("4piG", "G"), "4piG")},
        "physical": {"m": (_pos, 1e5 * AMU), "R0": (_pos, 1e-20), "separation": (_nonneg, 1e-18)},
        "numerics": {"seed": (_seed, 0), "mc_samples": (_count0, 0)},
    },
    "cc-trajectories": {
        "scenario": {"estimator": (_choice("ideal", "noisy"), "ideal")},
        "physical": {"m": (_pos, 6.9e-8), "separation": (_pos, 1e-6), "R0": (_pos, 1e-9)},
        "numerics": {"seed": (_seed, 0), "gamma": (_nonneg, 1.0), "dt": (_pos, 1e-4),
                     "n_steps": (_count, 1000), "n_traj": (_count, 1000),
                     "record_every": (_count, 100), "feedback": (_bool, False), "tau": (_nonneg, 0.0)},
    },
    "estimates": {
        "scenario": {},
        "physical": {"N": (_pos, 1.0), "L": (_pos, 1e-6), "omega": (_pos, 1e6), "m": (_pos, 1e-12),
                     "v": (_nonneg, 10.0), "m_brems": (_pos, 1e5 * AMU), "tau": (_pos, 1.0),
                     "R0": (_pos, 1e-20), "flux": (_nonneg, 1.0), "sigma": (_nonneg, 1e-69),
                     "coherence_time": (_pos, 1.0)},
        "numerics": {"seed": (_seed, 0)},
    },
}

CONSTANT_KEYS = ("G_N", "hbar", "c", "k_B", "amu", "alpha")


@dataclass(frozen=True)
class OutputConfig:
    format: str = "csv"
    path: str | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    model: str
    options: Mapping[str, Any] = field(default_factory=dict)
    physical: Mapping[str, Any] = field(default_factory=dict)
    numerics: Mapping[str, Any] = field(default_factory=dict)
    output: OutputConfig = OutputConfig()
    constants: Mapping[str, float] = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return int(self.numerics.get("seed", 0))

    def physical_constants(self) -> PhysicalConstants:
        try:
            return CONSTANTS.with_overrides(**self.constants)
        except InvalidInputError as exc:
            raise ConfigError(f"[constants]: {exc}") from exc

    def with_seed(self, seed: int) -> "ScenarioConfig":
        try:
            seed = _seed(seed)
        except ValueError as exc:
            raise ConfigError(f"seed: {exc}") from exc
        return replace(self, numerics={**self.numerics, "seed": seed})

    def with_output(self, format: str | None = None, path: str | None = None) -> "ScenarioConfig":
        fmt = self.output.format if format is None else format
        if fmt not in FORMATS:
            raise ConfigError(f"output format must be one of {FORMATS}")
        return replace(self, output=OutputConfig(fmt, self.output.path if path is None else path))

    def inputs(self) -> dict[str, Any]:
        """Flat echo of every parameter, for result records."""
        out = {f"scenario.{k}": v for k, v in self.options.items()}
        out.update({f"physical.{k}": v for k, v in self.physical.items()})
        out.update({f"numerics.{k}": v for k, v in self.numerics.items()})
        out.update({f"constants.{k}": v for k, v in self.constants.items()})
        return dict(sorted(out.items()))


def _parse_section(values: Mapping[str, str], schema: Mapping[str, tuple], section: str) -> dict:
    unknown = sorted(set(values) - set(schema))
    if unknown:
        raise ConfigError(f"[{section}]: unknown key(s) {unknown}; allowed {sorted(schema)}")
    out = {}
    for key, (parse, default) in schema.items():
        raw = values.get(key)
        if raw is None:
            out[key] = default
            continue
        try:
            out[key] = parse(raw)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from None
    return out


def build_config(scenario: str, model: str, options=None, physical=None, numerics=None,
                 output: OutputConfig | None = None, constants=None) -> ScenarioConfig:
    """Validate raw string/number mappings into a :class:`ScenarioConfig`."""
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; choose from {SCENARIOS}")
    if model not in MODELS:
        raise ConfigError(f"unknown model {model!r}; choose from {MODELS}")
    if model not in COMPATIBLE[scenario]:
        raise ConfigError(f"model {model!r} is not available for scenario {scenario!r} "
                          f"(allowed: {COMPATIBLE[scenario]})")
    schema = SCHEMA[scenario]
    opts = _parse_section(options or {}, schema["scenario"], "scenario")
    phys = _parse_section(physical or {}, schema["physical"], "physical")
    nums = _parse_section(numerics or {}, schema["numerics"], "numerics")
    consts = {}
    for k, v in (constants or {}).items():
        if k not in CONSTANT_KEYS:
            raise ConfigError(f"[constants]: unknown constant {k!r}; allowed {CONSTANT_KEYS}")
        try:
            consts[k] = _pos(v)
        except ValueError as exc:
            raise ConfigError(f"[constants] {k}: {exc}") from None
    output = output or OutputConfig()
    if output.format not in FORMATS:
        raise ConfigError(f"output format must be one of {FORMATS}")
    if scenario == "cc-trajectories" and nums["record_every"] > nums["n_steps"]:
        raise ConfigError(f"[numerics] record_every = {nums['record_every']} exceeds "
                          f"n_steps = {nums['n_steps']}; no decay can be measured")
    cfg = ScenarioConfig(scenario, model, opts, phys, nums, output, consts)
    cfg.physical_constants()
    return cfg


def load_config(path: str, environ: Mapping[str, str] | None = None) -> ScenarioConfig:
    environ = os.environ if environ is None else environ
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    parser.optionxform = str  # keep key case (G_N, R0)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    allowed = {"scenario", "physical", "numerics", "output", "constants"}
    extra = sorted(set(parser.sections()) - allowed)
    if extra:
        raise ConfigError(f"unknown section(s) {extra}")
    if not parser.has_section("scenario"):
        raise ConfigError("missing [scenario] section")
    sc = dict(parser["scenario"])
    name = sc.pop("name", None)
    model = sc.pop("model", None)
    if not name or not model:
        raise ConfigError("[scenario] needs 'name' and 'model'")
    out = dict(parser["output"]) if parser.has_section("output") else {}
    bad = sorted(set(out) - {"format", "path"})
    if bad:
        raise ConfigError(f"[output]: unknown key(s) {bad}")
    output = OutputConfig(out.get("format", "csv"), out.get("path") or None)

    def section(s):
        return dict(parser[s]) if parser.has_section(s) else {}

    cfg = build_config(name, model, sc, section("physical"), section("numerics"), output,
                       section("constants"))
    if environ.get("GRAVLAB_SEED"):
        cfg = cfg.with_seed(environ["GRAVLAB_SEED"])
    if environ.get("GRAVLAB_OUT"):
        cfg = cfg.with_output(path=environ["GRAVLAB_OUT"])
    return cfg
