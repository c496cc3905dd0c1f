"""Run configuration documents: YAML sections to validated run settings.

A run document has up to six top-level keys::

    mode: balanced                # model-only | experiment-only | balanced
    seed: 3                       # optimizer initialization seed
    output_dir: runs/bell         # where the CLI writes artifacts
    model:
      g_hz: 217.4
    experiment:                   # required for the measured modes
      true_g_hz: 219.574
      amplitude_scale: [0.98, 1.0, 0.98, 1.0]
      distortion_tau_s: 50.0e-6
      noise_sigma: 1.0e-3
      t1_s: [0.730, 0.096]
      t2_s: [0.0965, 0.0425]
    optimizer:
      d1_init: 1.0e+3
      max_iterations: 2000

Nested keys map one to one onto ``ExperimentConfig`` and
``OptimizerConfig`` fields, whose defaults apply to anything omitted.
Unknown keys are rejected by name, and every invariant violation is
reported with its section path.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional

import yaml

from .dynamics import SystemModel
from .experiment import ExperimentConfig
from .optimizer import MODES, OptimizerConfig

__all__ = ["ConfigError", "RunConfig", "parse_config", "load_config"]

_TOP_LEVEL_KEYS = ("mode", "seed", "output_dir", "model", "experiment", "optimizer")
_INT_FIELDS = {
    "seed", "max_backtracks", "max_iterations", "stall_window",
    "step1_patience", "m_slices",
}
_TUPLE_FIELDS = {"amplitude_scale": 4, "t1_s": 2, "t2_s": 2}
_OPTIONAL_FIELDS = {"amplitude_cap_hz"}


class ConfigError(ValueError):
    """A run document that cannot be parsed or validated."""


def _as_number(value):
    """Accept real numbers, plus numeric strings (YAML reads 1e-3 as text)."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            return None
    return None


def _coerce(path: str, name: str, value):
    """Convert one scalar document value to the target field type."""
    where = f"{path}.{name}" if path else name
    if name in _INT_FIELDS:
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    if name in _TUPLE_FIELDS:
        size = _TUPLE_FIELDS[name]
        if not isinstance(value, (list, tuple)) or len(value) != size:
            raise ConfigError(f"{where}: expected a list of {size} numbers, got {value!r}")
        numbers = [_as_number(v) for v in value]
        if any(v is None for v in numbers):
            raise ConfigError(f"{where}: expected a list of {size} numbers, got {value!r}")
        return tuple(numbers)
    if value is None and name in _OPTIONAL_FIELDS:
        return None
    number = _as_number(value)
    if number is None:
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    return number


def _build_section(path: str, section, cls):
    """Instantiate a config dataclass from one document section."""
    if section is None:
        section = {}
    if not isinstance(section, dict):
        raise ConfigError(f"{path}: expected a mapping, got {section!r}")
    known = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for name, value in section.items():
        if name not in known:
            raise ConfigError(f"unknown key {path + '.' + str(name)!r}")
        kwargs[name] = _coerce(path, name, value)
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


@dataclass(frozen=True)
class RunConfig:
    """A fully validated run: mode, system model, backend, optimizer."""

    mode: str = "model-only"
    seed: int = 0
    output_dir: Optional[str] = None
    model: SystemModel = dataclasses.field(default_factory=lambda: SystemModel(217.4))
    experiment: Optional[ExperimentConfig] = None
    optimizer: OptimizerConfig = dataclasses.field(default_factory=OptimizerConfig)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode: expected one of {MODES}, got {self.mode!r}")
        if self.mode != "model-only" and self.experiment is None:
            raise ConfigError(f"mode {self.mode!r} requires an experiment section")

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def as_document_dict(self) -> dict:
        """The resolved settings as a plain JSON-friendly mapping."""
        def scrub(value):
            if isinstance(value, float) and not math.isfinite(value):
                return repr(value)
            if isinstance(value, tuple):
                return [scrub(v) for v in value]
            return value

        doc = {
            "mode": self.mode,
            "seed": self.seed,
            "output_dir": self.output_dir,
            "model": {"g_hz": self.model.g_hz},
            "experiment": None,
            "optimizer": {
                k: scrub(v) for k, v in dataclasses.asdict(self.optimizer).items()
            },
        }
        if self.experiment is not None:
            doc["experiment"] = {
                k: scrub(v) for k, v in dataclasses.asdict(self.experiment).items()
            }
        return doc


def parse_config(text: str) -> RunConfig:
    """Parse and validate one YAML run document."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        if mark is not None:
            raise ConfigError(f"parse error at line {mark.line + 1}: {exc}") from exc
        raise ConfigError(f"parse error: {exc}") from exc
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError(f"top level must be a mapping, got {type(doc).__name__}")
    for key in doc:
        if key not in _TOP_LEVEL_KEYS:
            raise ConfigError(f"unknown key {str(key)!r}")

    mode = doc.get("mode", "model-only")
    if not isinstance(mode, str):
        raise ConfigError(f"mode: expected a string, got {mode!r}")

    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError(f"seed: expected an integer, got {seed!r}")

    output_dir = doc.get("output_dir")
    if output_dir is not None and not isinstance(output_dir, str):
        raise ConfigError(f"output_dir: expected a string, got {output_dir!r}")

    model_sec = doc.get("model") or {}
    if not isinstance(model_sec, dict):
        raise ConfigError(f"model: expected a mapping, got {model_sec!r}")
    for key in model_sec:
        if key != "g_hz":
            raise ConfigError(f"unknown key {'model.' + str(key)!r}")
    g_hz = _coerce("model", "g_hz", model_sec.get("g_hz", 217.4))
    try:
        model = SystemModel(g_hz=g_hz)
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from exc

    experiment = None
    if doc.get("experiment") is not None:
        experiment = _build_section("experiment", doc["experiment"], ExperimentConfig)
    optimizer = _build_section("optimizer", doc.get("optimizer"), OptimizerConfig)

    return RunConfig(
        mode=mode,
        seed=seed,
        output_dir=output_dir,
        model=model,
        experiment=experiment,
        optimizer=optimizer,
    )


def load_config(path) -> RunConfig:
    """Read and parse a run document from disk."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
