"""Run configuration: a single versioned JSON document per run."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .diagnostics import NormSpec
from .errors import ConfigError
from .evolution import InitialDataSpec, SchemeConfig
from .grid import RadialGrid, default_grid
from .problem import ProblemParams

SPEC_VERSION = 1


@dataclass(frozen=True)
class GridSpec:
    R_max: float | None = None
    num: int = 2000
    ratio: float | None = None
    stretch: float = 400.0

    def build(self, params: ProblemParams) -> RadialGrid:
        return default_grid(params, num=self.num, R_max=self.R_max, ratio=self.ratio,
                            stretch=self.stretch)


@dataclass(frozen=True)
class WeightSpec:
    generator: str = "default"
    eps: float | None = None


@dataclass(frozen=True)
class SweepSpec:
    n: tuple = (4,)
    mu: tuple = (1.0,)
    r0: tuple = (1.0,)
    v_minus: tuple = (0.0,)
    v_plus: tuple = (-1.0,)

    def __post_init__(self):
        for name in ("n", "mu", "r0", "v_minus", "v_plus"):
            value = getattr(self, name)
            if not isinstance(value, (list, tuple)) or not value:
                raise ConfigError(f"field 'sweep.{name}': expected a non-empty list")
            object.__setattr__(self, name, tuple(value))

    def cells(self) -> list[dict]:
        return [dict(n=n, mu=mu, r0=r0, v_minus=vm, v_plus=vp)
                for n in self.n for mu in self.mu for r0 in self.r0
                for vm in self.v_minus for vp in self.v_plus]


@dataclass(frozen=True)
class RunConfig:
    params: ProblemParams = ProblemParams(4, 1.0, 1.0, 0.0, -1.0)
    # stationary wave and weight checks
    grid: GridSpec = GridSpec()
    # time stepping; coarser so a 50-unit run takes about a second
    evolution_grid: GridSpec = GridSpec(num=600, stretch=30.0)
    scheme: SchemeConfig = SchemeConfig()
    initial: InitialDataSpec = InitialDataSpec()
    weight: WeightSpec = WeightSpec()
    norms: tuple = ()
    T_end: float = 50.0
    snapshots: int = 200
    stationary_tol: float = 1e-6
    seed: int = 0
    # bump centre is shifted by jitter * U(-1, 1), drawn from the seed
    jitter: float = 0.0
    workers: int = 1
    sweep: SweepSpec | None = None
    # fault injection for harness tests: {"nan_at_time": t} or {"chi_perturbation": eps}
    fault: dict = field(default_factory=dict)
    spec_version: int = SPEC_VERSION

    def to_dict(self) -> dict:
        return {
            "spec_version": self.spec_version,
            "params": self.params.to_dict(),
            "grid": dataclasses.asdict(self.grid),
            "evolution_grid": dataclasses.asdict(self.evolution_grid),
            "scheme": self.scheme.to_dict(),
            "initial": self.initial.to_dict(),
            "weight": dataclasses.asdict(self.weight),
            "norms": [n.to_dict() for n in self.norms],
            "T_end": self.T_end,
            "snapshots": self.snapshots,
            "stationary_tol": self.stationary_tol,
            "seed": self.seed,
            "jitter": self.jitter,
            "workers": self.workers,
            "sweep": None if self.sweep is None else
            {k: list(v) for k, v in dataclasses.asdict(self.sweep).items()},
            "fault": dict(self.fault),
        }

    def hash(self) -> str:
        return hashlib.sha256(dumps(self.to_dict()).encode()).hexdigest()

    def with_seed(self, seed: int) -> "RunConfig":
        return dataclasses.replace(self, seed=int(seed))


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _section(data: dict, key: str, build):
    if key not in data or data[key] is None:
        return None
    value = data[key]
    try:
        if not isinstance(value, dict):
            raise TypeError(f"expected an object, got {type(value).__name__}")
        return build(value)
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"field {key!r}: {exc}") from None


def from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    version = data.get("spec_version")
    if version != SPEC_VERSION:
        raise ConfigError(f"field 'spec_version': expected {SPEC_VERSION}, got {version!r}")
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown field(s): {', '.join(unknown)}")

    kwargs = {}
    for key, build in (("params", ProblemParams.from_dict), ("grid", lambda d: GridSpec(**d)),
                       ("evolution_grid", lambda d: GridSpec(**d)),
                       ("scheme", SchemeConfig.from_dict),
                       ("initial", InitialDataSpec.from_dict),
                       ("weight", lambda d: WeightSpec(**d)),
                       ("sweep", lambda d: SweepSpec(**d))):
        value = _section(data, key, build)
        if value is not None:
            kwargs[key] = value
    if data.get("norms"):
        try:
            kwargs["norms"] = tuple(NormSpec(**n) for n in data["norms"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"field 'norms': {exc}") from None
    for key, cast in (("T_end", float), ("snapshots", int), ("stationary_tol", float),
                      ("seed", int), ("jitter", float), ("workers", int)):
        if key in data:
            try:
                kwargs[key] = cast(data[key])
            except (TypeError, ValueError):
                raise ConfigError(f"field {key!r}: cannot read {data[key]!r}") from None
    if "fault" in data:
        if not isinstance(data["fault"], dict):
            raise ConfigError("field 'fault': expected an object")
        kwargs["fault"] = dict(data["fault"])
    cfg = RunConfig(**kwargs)
    if not cfg.T_end > 0:
        raise ConfigError("field 'T_end': must be positive")
    if cfg.snapshots < 2:
        raise ConfigError("field 'snapshots': need at least 2")
    if cfg.workers < 1:
        raise ConfigError("field 'workers': must be >= 1")
    return cfg


def loads(text: str) -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return from_dict(data)


def load(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    if not text.strip():
        raise ConfigError(f"config {path} is empty")
    return loads(text)


def serialize(cfg: RunConfig) -> str:
    return dumps(cfg.to_dict())
