"""Shared network primitives: stations, users, block-fading gains, unit helpers.

Channel gains are redrawn independently every slot (block fading). Sampling is
a pure function of (seed, slot_index), so sweep points and Monte-Carlo seeds
can be evaluated in any order, or in parallel, without changing the draws.
"""

import math
from dataclasses import dataclass

import numpy as np

MBS_ID = 0


def make_rng(seed: int, *path: int) -> np.random.Generator:
    """Independent generator for a (seed, *path) coordinate, e.g. (seed, slot)."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(path)))


def watts_to_dbm(power_w: float) -> float:
    """Convert a positive power in watts to dBm."""
    if power_w <= 0:
        raise ValueError(f"power must be positive to express in dBm, got {power_w}")
    return 10.0 * math.log10(power_w / 1e-3)


def dbm_to_watts(power_dbm: float) -> float:
    return 1e-3 * 10.0 ** (power_dbm / 10.0)


@dataclass(frozen=True)
class BaseStation:
    """One transmitter. Station 0 is the macro station, 1..M are femto stations."""

    ident: int
    bandwidth_hz: float

    def __post_init__(self):
        if self.ident < 0:
            raise ValueError("station ids start at 0")
        if not self.bandwidth_hz > 0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth_hz}")

    @property
    def is_macro(self) -> bool:
        return self.ident == MBS_ID


def validate_stations(stations) -> None:
    """Stations must be ids 0..M in order: one macro station, then the femtos."""
    ids = [s.ident for s in stations]
    if ids != list(range(len(stations))):
        raise ValueError(f"station ids must be 0..{len(stations) - 1} in order, got {ids}")


@dataclass(frozen=True)
class UserPopulation:
    """Users 0..count-1; coverage[k] is the femto station covering user k (0 = macro only).

    Every user is always reachable from the macro station; at most one femto
    covers any given user.
    """

    count: int
    coverage: tuple

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("need at least one user")
        if len(self.coverage) != self.count:
            raise ValueError("coverage must list one femto id (or 0) per user")
        if any(c < 0 for c in self.coverage):
            raise ValueError("coverage entries must be >= 0")

    def validate_against(self, n_stations: int) -> None:
        bad = [c for c in self.coverage if c >= n_stations]
        if bad:
            raise ValueError(f"coverage refers to unknown stations {bad}")


@dataclass(frozen=True)
class FadingSpec:
    """Exponential block-fading description.

    mean is a scalar or an (n_stations, n_users) array of per-link mean gains,
    encoding distance/path loss directly. seed keys the whole experiment.
    """

    mean: object
    seed: int
    distribution: str = "exponential"

    def __post_init__(self):
        if self.distribution != "exponential":
            raise ValueError(f"unsupported fading distribution {self.distribution!r}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if np.any(np.asarray(self.mean, dtype=float) <= 0):
            raise ValueError("mean gains must be positive")


def sample_gains(spec: FadingSpec, n_stations: int, n_users: int, slot_index: int) -> np.ndarray:
    """Draw the (n_stations, n_users) gain matrix for one slot.

    Deterministic in (spec.seed, slot_index); consecutive slots use
    independent streams.
    """
    if slot_index < 0:
        raise ValueError("slot_index must be non-negative")
    mean = np.broadcast_to(np.asarray(spec.mean, dtype=float), (n_stations, n_users))
    rng = make_rng(spec.seed, slot_index)
    return rng.exponential(mean)


def footprint_volume(per_station_power_w, bandwidths_hz, radius_per_watt: float = 1.0) -> float:
    """Spectral footprint: sum over stations of pi * radius^2 * bandwidth.

    The interference radius is modeled as proportional to transmit power;
    the constant of proportionality is a config input.
    """
    if radius_per_watt <= 0:
        raise ValueError("radius_per_watt must be positive")
    power = np.asarray(per_station_power_w, dtype=float)
    bw = np.asarray(bandwidths_hz, dtype=float)
    if power.shape != bw.shape:
        raise ValueError("need one bandwidth per station")
    return float(np.sum(math.pi * (radius_per_watt * power) ** 2 * bw))
