"""Scenario configuration: strict JSON schemas for the two experiment kinds.

Unknown keys are rejected so typos never silently fall back to defaults.
"""

import dataclasses
import json
from dataclasses import dataclass


class ConfigError(Exception):
    """Raised for malformed or inconsistent scenario configuration."""


MULTICAST_SWEEPS = ("num_levels", "mbs_bandwidth_hz")
STREAM_SWEEPS = ("num_channels", "eta", "sensing_error", "common_bandwidth_bps", "budget")
COVERAGE_MODES = ("none", "single", "random")
ALGORITHMS = ("proposed", "equal", "diversity")


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def _check_sweep(sweep, allowed) -> None:
    if sweep is None:
        return
    _require(isinstance(sweep, dict), "sweep must be an object")
    extra = sorted(set(sweep) - {"parameter", "values"})
    _require(not extra, f"unknown sweep keys: {extra}")
    _require("parameter" in sweep and "values" in sweep, "sweep needs 'parameter' and 'values'")
    _require(
        sweep["parameter"] in allowed,
        f"sweep parameter {sweep['parameter']!r} not in {sorted(allowed)}",
    )
    values = sweep["values"]
    _require(isinstance(values, list) and len(values) > 0, "sweep values must be a non-empty list")


@dataclass
class MulticastConfig:
    """One layered-multicast power experiment."""

    name: str
    kind: str
    num_users: int
    num_levels: int
    target_rate_bps: float
    noise_w: float
    mbs_bandwidth_hz: float
    num_fbs: int = 0
    fbs_bandwidth_hz: "float | None" = None
    total_bandwidth_hz: "float | None" = None
    mbs_gain_mean: float = 1.0
    fbs_gain_mean: "float | None" = None
    coverage: str = "none"
    macro_only_fraction: float = 0.0
    include_heuristic: bool = True
    oracle_max_users: int = 0
    radius_per_watt: float = 1.0
    sweep: "dict | None" = None

    def __post_init__(self):
        _require(self.kind == "multicast", f"expected kind 'multicast', got {self.kind!r}")
        _require(bool(self.name), "name must be non-empty")
        _require(self.num_users >= 1, "num_users must be >= 1")
        _require(self.num_levels >= 1, "num_levels must be >= 1")
        _require(self.target_rate_bps > 0, "target_rate_bps must be positive")
        _require(self.noise_w > 0, "noise_w must be positive")
        _require(self.mbs_bandwidth_hz > 0, "mbs_bandwidth_hz must be positive")
        _require(self.num_fbs >= 0, "num_fbs cannot be negative")
        _require(self.mbs_gain_mean > 0, "mbs_gain_mean must be positive")
        _require(self.coverage in COVERAGE_MODES, f"coverage must be one of {COVERAGE_MODES}")
        _require(0.0 <= self.macro_only_fraction < 1.0, "macro_only_fraction must be in [0, 1)")
        _require(self.oracle_max_users >= 0, "oracle_max_users cannot be negative")
        _require(self.radius_per_watt > 0, "radius_per_watt must be positive")
        if self.coverage == "none":
            _require(self.num_fbs == 0, "coverage 'none' means no femto stations")
        elif self.coverage == "single":
            _require(self.num_fbs == 1, "coverage 'single' needs exactly one femto station")
        else:
            _require(self.num_fbs >= 1, "coverage 'random' needs at least one femto station")
        if self.num_fbs > 0:
            _require(self.fbs_gain_mean is not None and self.fbs_gain_mean > 0,
                     "femto scenarios need a positive fbs_gain_mean")
            _require(
                (self.fbs_bandwidth_hz is not None) != (self.total_bandwidth_hz is not None),
                "femto scenarios need exactly one of fbs_bandwidth_hz or total_bandwidth_hz",
            )
            if self.fbs_bandwidth_hz is not None:
                _require(self.fbs_bandwidth_hz > 0, "fbs_bandwidth_hz must be positive")
            if self.total_bandwidth_hz is not None:
                _require(self.total_bandwidth_hz > self.mbs_bandwidth_hz,
                         "total_bandwidth_hz must exceed mbs_bandwidth_hz")
        _check_sweep(self.sweep, MULTICAST_SWEEPS)
        if self.sweep is not None:
            param, values = self.sweep["parameter"], self.sweep["values"]
            if param == "num_levels":
                _require(all(isinstance(v, int) and v >= 1 for v in values),
                         "num_levels sweep values must be integers >= 1")
            else:
                _require(all(isinstance(v, (int, float)) and v > 0 for v in values),
                         "bandwidth sweep values must be positive numbers")
                if self.total_bandwidth_hz is not None:
                    _require(all(v < self.total_bandwidth_hz for v in values),
                             "bandwidth sweep values must leave room for the femto band")

    def bandwidths_hz(self, mbs_bandwidth: "float | None" = None):
        """Per-station bandwidth vector for one sweep point."""
        b0 = self.mbs_bandwidth_hz if mbs_bandwidth is None else float(mbs_bandwidth)
        if self.num_fbs == 0:
            return [b0]
        bf = (
            self.fbs_bandwidth_hz
            if self.fbs_bandwidth_hz is not None
            else self.total_bandwidth_hz - b0
        )
        return [b0] + [bf] * self.num_fbs


@dataclass
class StreamConfig:
    """One stochastic video-scheduling experiment over sensed spectrum."""

    name: str
    kind: str
    num_users: int
    num_channels: int
    num_slots: int
    window_slots: int
    p01: float
    p10: float
    gamma: float
    false_alarm: float
    miss: float
    common_bandwidth_bps: float
    channel_bandwidth_bps: float
    alpha_db: object
    beta_db_per_bps: object
    mean_sinr_mbs: object
    mean_sinr_fbs: object
    eta: "float | None" = None
    fbs_sensing: bool = True
    num_fbs: int = 1
    assoc: "list | None" = None
    edges: "list | None" = None
    max_rate_bps: object = None
    decode_threshold: float = 1.0
    step: float = 0.01
    phi: float = 1e-6
    max_iters: int = 2000
    alloc_iters: int = 300
    algorithms: "list | None" = None
    emit_trace: bool = False
    budget: "int | None" = None
    sweep: "dict | None" = None

    def __post_init__(self):
        _require(self.kind == "stream", f"expected kind 'stream', got {self.kind!r}")
        _require(bool(self.name), "name must be non-empty")
        _require(self.num_users >= 1, "num_users must be >= 1")
        _require(self.num_channels >= 1, "num_channels must be >= 1")
        _require(self.window_slots >= 1, "window_slots must be >= 1")
        _require(self.num_slots >= 1 and self.num_slots % self.window_slots == 0,
                 "num_slots must be a positive multiple of window_slots")
        for nm in ("p01", "p10", "gamma"):
            v = getattr(self, nm)
            _require(0.0 <= v <= 1.0, f"{nm} must be a probability")
        for nm in ("false_alarm", "miss"):
            v = getattr(self, nm)
            _require(0.0 <= v < 0.5, f"{nm} must be in [0, 0.5)")
        if self.eta is not None:
            _require(0.0 < self.eta < 1.0, "eta must be in (0, 1)")
            _require(self.p10 > 0, "eta override needs p10 > 0")
            _require(self._p01_from_eta(self.eta) <= 1.0,
                     "eta override implies p01 > 1; lower eta or raise p10")
        _require(self.common_bandwidth_bps > 0, "common_bandwidth_bps must be positive")
        _require(self.channel_bandwidth_bps > 0, "channel_bandwidth_bps must be positive")
        _require(self.num_fbs >= 1, "num_fbs must be >= 1")
        if self.assoc is None:
            self.assoc = [1] * self.num_users
        _require(len(self.assoc) == self.num_users, "assoc needs one femto id per user")
        _require(all(isinstance(a, int) and 1 <= a <= self.num_fbs for a in self.assoc),
                 "assoc entries must be femto ids in 1..num_fbs")
        if self.edges is None:
            self.edges = []
        for e in self.edges:
            _require(isinstance(e, list) and len(e) == 2, f"edge {e} must be a [i, j] pair")
            i, j = e
            _require(isinstance(i, int) and isinstance(j, int) and 1 <= i < j <= self.num_fbs,
                     f"edge {e} must satisfy 1 <= i < j <= num_fbs")
        self.alpha_db = self._per_user("alpha_db", self.alpha_db, positive=True)
        self.beta_db_per_bps = self._per_user("beta_db_per_bps", self.beta_db_per_bps, positive=True)
        if self.max_rate_bps is not None:
            self.max_rate_bps = self._per_user("max_rate_bps", self.max_rate_bps, positive=True)
        _require(self.decode_threshold >= 0, "decode_threshold cannot be negative")
        self.mean_sinr_mbs = self._per_user("mean_sinr_mbs", self.mean_sinr_mbs, positive=True)
        self.mean_sinr_fbs = self._per_user("mean_sinr_fbs", self.mean_sinr_fbs, positive=True)
        _require(self.step > 0, "step must be positive")
        _require(self.phi >= 0, "phi cannot be negative")
        _require(self.max_iters >= 1, "max_iters must be >= 1")
        _require(self.alloc_iters >= 1, "alloc_iters must be >= 1")
        if self.algorithms is None:
            self.algorithms = list(ALGORITHMS)
        _require(len(self.algorithms) > 0, "algorithms must be non-empty")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        _require(not bad, f"unknown algorithms {bad}; choose from {ALGORITHMS}")
        _require("proposed" in self.algorithms, "the proposed algorithm must always run")
        if self.budget is not None:
            _require(isinstance(self.budget, int) and self.budget >= 1, "budget must be an integer >= 1")
        _check_sweep(self.sweep, STREAM_SWEEPS)
        if self.sweep is not None:
            param, values = self.sweep["parameter"], self.sweep["values"]
            if param == "num_channels":
                _require(all(isinstance(v, int) and v >= 1 for v in values),
                         "num_channels sweep values must be integers >= 1")
            elif param == "eta":
                _require(self.p10 > 0, "eta sweep needs p10 > 0")
                for v in values:
                    _require(isinstance(v, (int, float)) and 0.0 < v < 1.0,
                             "eta sweep values must be in (0, 1)")
                    _require(self._p01_from_eta(v) <= 1.0,
                             f"eta sweep value {v} implies p01 > 1")
            elif param == "sensing_error":
                for v in values:
                    _require(isinstance(v, list) and len(v) == 2
                             and all(0.0 <= x < 0.5 for x in v),
                             "sensing_error sweep values must be [false_alarm, miss] pairs in [0, 0.5)")
            elif param == "common_bandwidth_bps":
                _require(all(isinstance(v, (int, float)) and v > 0 for v in values),
                         "common_bandwidth_bps sweep values must be positive")
            else:
                _require(all(isinstance(v, int) and v >= 1 for v in values),
                         "budget sweep values must be integers >= 1")

    def _p01_from_eta(self, eta: float) -> float:
        return eta * self.p10 / (1.0 - eta)

    def _per_user(self, name, value, positive: bool):
        if isinstance(value, (int, float)):
            values = (float(value),) * self.num_users
        elif isinstance(value, list):
            _require(len(value) == self.num_users, f"{name} list needs one entry per user")
            _require(all(isinstance(v, (int, float)) for v in value), f"{name} entries must be numbers")
            values = tuple(float(v) for v in value)
        else:
            raise ConfigError(f"{name} must be a number or a per-user list")
        if positive:
            _require(all(v > 0 for v in values), f"{name} entries must be positive")
        return values


_KINDS = {"multicast": MulticastConfig, "stream": StreamConfig}


def config_from_dict(data: dict):
    """Build a config from a parsed JSON object, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    kind = data.get("kind")
    if kind not in _KINDS:
        raise ConfigError(f"kind must be one of {sorted(_KINDS)}, got {kind!r}")
    cls = _KINDS[kind]
    known = {f.name for f in dataclasses.fields(cls)}
    extra = sorted(set(data) - known)
    if extra:
        raise ConfigError(f"unknown config keys: {extra}")
    missing = sorted(
        f.name
        for f in dataclasses.fields(cls)
        if f.default is dataclasses.MISSING and f.name not in data
    )
    if missing:
        raise ConfigError(f"missing required config keys: {missing}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path):
    """Load and validate a scenario config from a JSON file."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(data)
