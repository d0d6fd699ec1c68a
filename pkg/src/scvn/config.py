"""Run configuration: dataclasses with Table-1 defaults and strict JSON loading.

An empty JSON object ``{}`` yields the default freeway instance (60 vehicles,
12 KBs, 24-unit capacity, Zipf skew 1.0, 100 packets/s, eta0 = 0.5,
theta0 = 0.1).
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ConfigError


@dataclass(frozen=True)
class ScenarioConfig:
    n_vues: int = 60
    lanes: int = 3  # per direction
    lane_width_m: float = 4.0
    cell_radius_m: float = 500.0
    headway_s: float = 2.5
    velocity_kmh: float = 70.0
    tx_dbm: float = 20.0
    noise_dbm: float = -114.0
    pl_intercept_db: float = 128.1
    pl_slope_db: float = 37.6
    shadow_std_db: float = 8.0
    fading: bool = True
    gamma0_db: float = 30.0
    interference_mode: str = "none"

    def validate(self) -> None:
        _require(self.n_vues >= 2, "scenario.n_vues must be >= 2")
        _require(self.lanes >= 1, "scenario.lanes must be >= 1")
        _require(self.lane_width_m > 0, "scenario.lane_width_m must be > 0")
        _require(self.cell_radius_m >= 0, "scenario.cell_radius_m must be >= 0")
        _require(self.headway_s > 0, "scenario.headway_s must be > 0")
        _require(self.velocity_kmh > 0, "scenario.velocity_kmh must be > 0")
        _require(self.pl_slope_db > 0, "scenario.pl_slope_db must be > 0")
        _require(self.shadow_std_db >= 0, "scenario.shadow_std_db must be >= 0")
        _require(
            self.interference_mode in ("none", "aggregate"),
            "scenario.interference_mode must be 'none' or 'aggregate'",
        )


@dataclass(frozen=True)
class KnowledgeConfig:
    n_kbs: int = 12
    size_min: int = 1
    size_max: int = 5
    capacity: float = 24.0
    zipf_skew: float = 1.0
    lambda_pps: float = 100.0
    interp_min_s: float = 5e-3
    interp_max_s: float = 1e-2
    shared_interp: bool = True

    def validate(self) -> None:
        _require(1 <= self.n_kbs <= 30, "knowledge.n_kbs must be in [1, 30]")
        _require(1 <= self.size_min <= self.size_max, "knowledge sizes need 1 <= size_min <= size_max")
        _require(self.capacity > 0, "knowledge.capacity must be > 0")
        _require(self.zipf_skew >= 0, "knowledge.zipf_skew must be >= 0")
        _require(self.lambda_pps > 0, "knowledge.lambda_pps must be > 0")
        _require(0 < self.interp_min_s <= self.interp_max_s, "knowledge needs 0 < interp_min_s <= interp_max_s")


@dataclass(frozen=True)
class ConstraintConfig:
    eta0: float = 0.5
    theta0: float = 0.1

    def validate(self) -> None:
        _require(0 <= self.eta0 <= 1, "constraints.eta0 must be in [0, 1]")
        _require(0 <= self.theta0 <= 1, "constraints.theta0 must be in [0, 1]")


@dataclass(frozen=True)
class SolverConfig:
    M: int = 50
    Z: int = 100
    sigma: int = 2
    tabu_capacity: int = 50
    nu0: float = 0.05
    tau0: float = 0.1
    p2_backend: str = "lp"
    recovery_mode: str = "best_feasible"
    p1_mode: str = "tabu"

    def validate(self) -> None:
        _require(self.M >= 1, "solver.M must be >= 1")
        _require(self.Z >= 0, "solver.Z must be >= 0")
        _require(self.sigma >= 0, "solver.sigma must be >= 0")
        _require(self.tabu_capacity >= 1, "solver.tabu_capacity must be >= 1")
        _require(self.nu0 > 0, "solver.nu0 must be > 0")
        _require(self.tau0 >= 0, "solver.tau0 must be >= 0")
        _require(self.p2_backend in ("lp", "greedy"), "solver.p2_backend must be 'lp' or 'greedy'")
        _require(
            self.recovery_mode in ("best_feasible", "last"),
            "solver.recovery_mode must be 'best_feasible' or 'last'",
        )
        _require(self.p1_mode in ("tabu", "exhaustive"), "solver.p1_mode must be 'tabu' or 'exhaustive'")


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    knowledge: KnowledgeConfig = field(default_factory=KnowledgeConfig)
    constraints: ConstraintConfig = field(default_factory=ConstraintConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    seed: int = 0

    def validate(self) -> "RunConfig":
        self.scenario.validate()
        self.knowledge.validate()
        self.constraints.validate()
        self.solver.validate()
        _require(isinstance(self.seed, int) and self.seed >= 0, "seed must be a non-negative integer")
        return self

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


_SECTIONS = {
    "scenario": ScenarioConfig,
    "knowledge": KnowledgeConfig,
    "constraints": ConstraintConfig,
    "solver": SolverConfig,
}

# sweepable parameter name -> (section, field)
SWEEP_PARAMS = {
    "V": ("scenario", "n_vues"),
    "N": ("knowledge", "n_kbs"),
    "xi": ("knowledge", "zipf_skew"),
    "eta0": ("constraints", "eta0"),
    "theta0": ("constraints", "theta0"),
    "C": ("knowledge", "capacity"),
}


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _coerce(cls, name: str, value: Any, expected: Any) -> Any:
    if isinstance(expected, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{cls.__name__}.{name}: expected bool, got {value!r}")
        return value
    if isinstance(expected, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{cls.__name__}.{name}: expected integer, got {value!r}")
        return value
    if isinstance(expected, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{cls.__name__}.{name}: expected number, got {value!r}")
        if not math.isfinite(value) and name != "gamma0_db":
            raise ConfigError(f"{cls.__name__}.{name}: must be finite")
        return float(value)
    if isinstance(expected, str):
        if not isinstance(value, str):
            raise ConfigError(f"{cls.__name__}.{name}: expected string, got {value!r}")
        return value
    return value


def _section_from_dict(cls, data: Any, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be a JSON object")
    defaults = cls()
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")
    kwargs = {k: _coerce(cls, k, v, getattr(defaults, k)) for k, v in data.items()}
    return cls(**kwargs)


def config_from_dict(data: Any) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = set(data) - set(_SECTIONS) - {"seed"}
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(sorted(unknown))}")
    kwargs: dict[str, Any] = {
        name: _section_from_dict(cls, data[name], name) for name, cls in _SECTIONS.items() if name in data
    }
    if "seed" in data:
        kwargs["seed"] = _coerce(RunConfig, "seed", data["seed"], 0)
    return RunConfig(**kwargs).validate()


def load_config(path: str | os.PathLike, env: dict[str, str] | None = None) -> RunConfig:
    """Read a JSON run config; ``SCVN_SEED`` in ``env`` overrides the seed."""
    env = os.environ if env is None else env
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    cfg = config_from_dict(data)
    if env.get("SCVN_SEED"):
        try:
            seed = int(env["SCVN_SEED"])
        except ValueError as exc:
            raise ConfigError(f"SCVN_SEED must be an integer, got {env['SCVN_SEED']!r}") from exc
        cfg = dataclasses.replace(cfg, seed=seed).validate()
    return cfg


def with_param(cfg: RunConfig, param: str, value: float) -> RunConfig:
    """Return a copy of ``cfg`` with one sweepable parameter replaced."""
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"unknown sweep parameter {param!r}; choose from {sorted(SWEEP_PARAMS)}")
    section, name = SWEEP_PARAMS[param]
    sub = getattr(cfg, section)
    expected = getattr(sub, name)
    if isinstance(expected, int) and not isinstance(expected, bool):
        if float(value) != int(value):
            raise ConfigError(f"{param} must be an integer, got {value}")
        value = int(value)
    else:
        value = float(value)
    return dataclasses.replace(cfg, **{section: dataclasses.replace(sub, **{name: value})}).validate()
