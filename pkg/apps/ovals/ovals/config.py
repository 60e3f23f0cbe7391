"""
Experiment configuration.

Config files use a flat key-value grammar:

    # comment
    key = value
    key = v1, v2, v3        (list fields only)

Keys are the field names of ExperimentConfig, each at most once; blank
lines and text after '#' are ignored.
"""
import hashlib
import json
import logging
import math
import typing
from pathlib import Path
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

import ovals.definitions as defs
from ovals.asymptotics import RegionParams
from ovals.classes import StepPolicy, StopRule, SymmetryClass
from ovals.errors import ConfigError

logger = logging.getLogger(__name__)

# fields that do not change any numerical output
NON_SEMANTIC_FIELDS = {"out", "threads"}

ExperimentTag = Literal[
    "radial-asymptotics",
    "spectral-trace",
    "soliton-atlas",
    "foliation-check",
    "width-ratio",
    "ratio-solve",
]


class ExperimentConfig(BaseModel):
    """One experiment: its tag, the symmetry class, parameters and overrides."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    tag: ExperimentTag
    n: int = 3
    k: int = 2

    # radial flow
    ell: float = defs.DEFAULT_ELL
    m: int = 256
    n_samples: int = 401
    stop_fraction: float = defs.DEFAULT_STOP_AREA_FRACTION
    snapshot_fraction: float = defs.DEFAULT_SNAPSHOT_FRACTION
    c_cfl: float = defs.DEFAULT_CFL
    max_steps: int = defs.DEFAULT_MAX_STEPS

    # spectral
    quadrature: int = 64

    # solitons
    a: List[float] = []
    b: List[float] = []
    eta: float = 1.0
    speed: float = defs.BOWL_SPEED
    s_max: float = 10.0
    r_max: float = defs.DEFAULT_TAIL_RADIUS
    ode_tol: float = 1e-10
    leaf_samples: int = 101

    # surface flow and width ratios
    grid: int = 64
    a1: List[float] = []
    targets: List[float] = []
    delta: float = defs.DELTA_CLAMP
    tol_ratio: float = defs.DEFAULT_TOL_RATIO
    normalize_xtol: float = defs.DEFAULT_NORMALIZE_XTOL
    refine: bool = True  # rerun one sweep point at twice the grid
    refine_a1: float = 0.3

    # verifier
    M: float = defs.DEFAULT_M
    K_min: float = defs.DEFAULT_K_WINDOW[0]
    K_max: float = defs.DEFAULT_K_WINDOW[1]
    S: float = defs.DEFAULT_S
    L: float = defs.DEFAULT_L
    theta: Optional[float] = None

    out: str = "out"
    threads: int = 1

    @field_validator(
        "stop_fraction", "snapshot_fraction", "c_cfl", "ode_tol", "tol_ratio",
        "normalize_xtol", "speed", "s_max", "r_max", "eta", "ell", "M", "S", "L",
    )
    @classmethod
    def check_positive(cls, v: float) -> float:
        if not (math.isfinite(v) and v > 0.0):
            raise ValueError(f"must be positive and finite, got {v}")
        return v

    @field_validator("m", "n_samples", "quadrature", "grid", "max_steps", "threads", "leaf_samples")
    @classmethod
    def check_count(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"must be >= 1, got {v}")
        return v

    @field_validator("a1", "targets")
    @classmethod
    def check_open_interval(cls, v: List[float]) -> List[float]:
        for x in v:
            if not 0.0 < x < 1.0:
                raise ValueError(f"values must lie in (0, 1), got {x}")
        return v

    @field_validator("refine_a1")
    @classmethod
    def check_refine_point(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError(f"must lie in (0, 1), got {v}")
        return v

    @field_validator("a", "b")
    @classmethod
    def check_parameters(cls, v: List[float]) -> List[float]:
        for x in v:
            if not (math.isfinite(x) and x > 0.0):
                raise ValueError(f"values must be positive, got {x}")
        return v

    @model_validator(mode="after")
    def check_tag_fields(self) -> "ExperimentConfig":
        if self.k < 1 or self.n - self.k < 1:
            raise ValueError(f"need 1 <= k <= n-1, got n={self.n}, k={self.k}")
        if self.tag in ("width-ratio", "ratio-solve") and self.k != 2:
            raise ValueError(f"{self.tag} runs the k = 2 surface solver, got k={self.k}")
        if self.tag == "width-ratio" and not self.a1:
            raise ValueError("width-ratio needs a1 values")
        if self.tag == "ratio-solve" and not self.targets:
            raise ValueError("ratio-solve needs target values")
        if self.tag == "foliation-check" and not (self.a or self.b):
            raise ValueError("foliation-check needs shrinker parameters a or tail slopes b")
        if self.tag == "foliation-check" and any(x > 1.0 for x in self.b):
            raise ValueError("tail slopes b must satisfy 0 < b <= 1")
        if not 0.0 <= self.K_min < self.K_max:
            raise ValueError(f"need 0 <= K_min < K_max, got {self.K_min}, {self.K_max}")
        return self

    @property
    def sym(self) -> SymmetryClass:
        return SymmetryClass(self.n, self.k)

    def policy(self) -> StepPolicy:
        return StepPolicy(c_cfl=self.c_cfl)

    def stop_rule(self) -> StopRule:
        return StopRule(
            stop_fraction=self.stop_fraction,
            snapshot_fraction=self.snapshot_fraction,
            max_steps=self.max_steps,
        )

    def region_params(self, **overrides) -> RegionParams:
        return RegionParams(M=self.M, K=(self.K_min, self.K_max), S=self.S, sym=self.sym, **overrides)


def _list_fields() -> set:
    return {
        name
        for name, info in ExperimentConfig.model_fields.items()
        if typing.get_origin(info.annotation) in (list, List)
    }


def parse_config_text(text: str) -> Dict[str, object]:
    """
    Parse the flat key-value grammar into raw field values.

    :param text:
    :return: field name -> string, or list of strings for list fields
    """
    known = set(ExperimentConfig.model_fields)
    lists = _list_fields()
    values: Dict[str, object] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        key, sep, raw = content.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep or not key.isidentifier():
            raise ConfigError(f"line {number}: expected 'key = value', got {line.strip()!r}")
        if key not in known:
            raise ConfigError(f"line {number}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {number}: duplicate key {key!r}")
        if not raw:
            raise ConfigError(f"line {number}: empty value for {key!r}")
        if key in lists:
            values[key] = [item.strip() for item in raw.split(",") if item.strip()]
        elif "," in raw:
            raise ConfigError(f"line {number}: {key!r} takes a single value")
        else:
            values[key] = raw
    return values


def build_config(values: Dict[str, object]) -> ExperimentConfig:
    try:
        return ExperimentConfig(**values)
    except ValidationError as err:
        raise ConfigError(str(err)) from err


def load_config(path: Optional[Path] = None, tag: Optional[str] = None, **overrides) -> ExperimentConfig:
    """
    Read a config file (optional), apply the subcommand tag and command-line
    overrides, and validate.

    :param path: config file in the flat grammar
    :param tag: experiment tag from the subcommand; must agree with the file
    :param overrides: values that replace file values when not None
    :return:
    """
    values: Dict[str, object] = {}
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as err:
            raise ConfigError(f"could not read config {path}: {err}") from err
        values = parse_config_text(text)
    if tag is not None:
        if "tag" in values and values["tag"] != tag:
            raise ConfigError(f"config tag {values['tag']!r} does not match subcommand {tag!r}")
        values["tag"] = tag
    values.update({k: v for k, v in overrides.items() if v is not None})
    return build_config(values)


def semantic_fields(cfg: ExperimentConfig) -> dict:
    return cfg.model_dump(exclude=NON_SEMANTIC_FIELDS)


def config_hash(cfg: ExperimentConfig) -> str:
    """SHA-256 of the canonical JSON of every field except out and threads."""
    canonical = json.dumps(semantic_fields(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def format_config(cfg: ExperimentConfig) -> str:
    """Serialize back to the flat grammar, one key per line, sorted."""
    lines = []
    for key, value in sorted(cfg.model_dump().items()):
        if value is None or (isinstance(value, list) and not value):
            continue
        if isinstance(value, list):
            value = ", ".join(repr(float(v)) for v in value)
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
