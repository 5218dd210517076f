"""Flat ``key = value`` experiment configuration for the sweep command."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import InvalidConfig, UsageError
from .routing import ALGORITHMS, RoutingParams
from .simulate import SimConfig

ROUTING_KEYS = {
    "max_credits": float,
    "phi": float,
    "window": int,
    "credit_rule": str,
    "gamma_hat": int,
    "psi": float,
    "observation_period_cycles": int,
    "max_per_class": int,
}

SIM_KEYS = {
    "lambda_per_source": float,
    "bw_min": float,
    "bw_max": float,
    "link_capacity": float,
    "warmup_requests": int,
    "total_requests": int,
}

LIST_KEYS = ("algorithms", "loads", "holding_times", "seeds", "subnet_labels")
OTHER_KEYS = ("topology", "name", "traffic", "intra_weight", "workers", "out")
KNOWN_KEYS = set(ROUTING_KEYS) | set(SIM_KEYS) | set(LIST_KEYS) | set(OTHER_KEYS)


def parse_config_text(text: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfig(f"line {lineno}: expected key = value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise InvalidConfig(f"line {lineno}: unknown key {key!r}")
        values[key] = value
    return values


def read_config(path) -> dict[str, str]:
    return parse_config_text(Path(path).read_text())


def parse_int_list(text: str) -> list[int]:
    """``"1,2,5-7"`` -> ``[1, 2, 5, 6, 7]``."""
    out: list[int] = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def parse_float_list(text: str) -> list[float]:
    return [float(p) for p in text.replace(" ", "").split(",") if p]


@dataclass
class ExperimentConfig:
    topology: str | None = None
    name: str | None = None
    algorithms: list[str] = field(default_factory=lambda: ["CBR"])
    loads: list[float] = field(default_factory=list)
    holding_times: list[float] = field(default_factory=list)
    seeds: list[int] = field(default_factory=list)
    routing: dict = field(default_factory=dict)
    sim: dict = field(default_factory=dict)
    traffic: str = "uniform"
    subnet_labels: str = "auto"
    intra_weight: float = 3.0
    workers: int = 1
    out: str | None = None

    @classmethod
    def from_mapping(cls, values: dict[str, str]) -> ExperimentConfig:
        unknown = set(values) - KNOWN_KEYS
        if unknown:
            raise InvalidConfig(f"unknown keys: {sorted(unknown)}")
        cfg = cls()
        try:
            for key, value in values.items():
                if key in ROUTING_KEYS:
                    cfg.routing[key] = ROUTING_KEYS[key](value)
                elif key in SIM_KEYS:
                    cfg.sim[key] = SIM_KEYS[key](value)
                elif key == "algorithms":
                    cfg.algorithms = [a.strip().upper() for a in value.split(",") if a.strip()]
                elif key == "loads":
                    cfg.loads = parse_float_list(value)
                elif key == "holding_times":
                    cfg.holding_times = parse_float_list(value)
                elif key == "seeds":
                    cfg.seeds = parse_int_list(value)
                elif key == "intra_weight":
                    cfg.intra_weight = float(value)
                elif key == "workers":
                    cfg.workers = int(value)
                else:
                    setattr(cfg, key, value)
        except ValueError as exc:
            raise InvalidConfig(f"bad value: {exc}") from None
        return cfg

    def validate(self) -> None:
        if not self.topology:
            raise InvalidConfig("no topology file given")
        if not self.seeds:
            raise InvalidConfig("seed list is empty")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad or not self.algorithms:
            raise InvalidConfig(f"algorithms must be drawn from {ALGORITHMS}, got {self.algorithms}")
        if bool(self.loads) == bool(self.holding_times):
            raise InvalidConfig("give exactly one of loads and holding_times")
        if any(x <= 0 for x in self.loads + self.holding_times):
            raise InvalidConfig("loads and holding times must be positive")
        if self.traffic not in ("uniform", "two_subnet"):
            raise InvalidConfig(f"unknown traffic model {self.traffic!r}")
        if self.workers < 1:
            raise InvalidConfig("workers must be >= 1")
        try:
            RoutingParams(**self.routing)
            SimConfig(mean_holding_time=1.0, **self.sim).validate()
        except UsageError as exc:
            raise InvalidConfig(str(exc)) from None

    def routing_params(self) -> RoutingParams:
        return RoutingParams(**self.routing)
