"""Scenario configuration and seeded generation.

External interfaces use degrees and dBm; everything downstream of
``make_scenario`` is radians and watts.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .arraymodel import ArrayGeometry, ChannelSet, PathLossModel, synth_channel
from .uncertainty import AngleUncertainty


class ConfigError(ValueError):
    """Invalid or unreadable run configuration."""


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    return 10.0 * math.log10(watts) + 30.0


@dataclass(frozen=True)
class SystemConfig:
    """All scenario scalars. Field names carry their units."""

    num_antennas: int = 8
    num_users: int = 3
    num_targets: int = 2
    user_angles_deg: tuple = (13.0, 50.0, 65.0)
    target_angles_deg: tuple = (121.0, 127.0)
    distance_range_m: tuple = (20.0, 70.0)
    power_dbm: float = 30.0
    noise_dbm: float = -80.0
    rho: float = 0.8
    varpi: float = 0.2            # CSI error radius as a fraction of ||h_hat||
    delta_theta_deg: float = 6.0  # full width of each target's angle interval
    hull_samples: int = 11
    pathloss_ref_db: float = 30.0
    pathloss_exponent: float = 3.0
    rician_k_db: float = math.inf  # inf = pure line of sight
    inner_tol: float = 1e-3
    outer_tol: float = 1e-3
    max_inner: int = 30
    max_outer: int = 20
    solver_feas_tol: float = 1e-7
    eval_samples: int = 10_000

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise ConfigError(f"rho must be in [0, 1], got {self.rho}")
        if not 0.0 <= self.varpi < 1.0:
            raise ConfigError(f"varpi must be in [0, 1), got {self.varpi}")
        if self.delta_theta_deg < 0:
            raise ConfigError("delta_theta_deg must be nonnegative")
        if len(self.user_angles_deg) != self.num_users:
            raise ConfigError("user_angles_deg length must equal num_users")
        if len(self.target_angles_deg) != self.num_targets:
            raise ConfigError("target_angles_deg length must equal num_targets")
        if self.hull_samples < 1:
            raise ConfigError("hull_samples must be at least 1")
        if min(self.inner_tol, self.outer_tol, self.solver_feas_tol) <= 0:
            raise ConfigError("tolerances must be positive")

    @property
    def power_budget(self) -> float:
        return dbm_to_watts(self.power_dbm)

    @property
    def noise_power(self) -> float:
        return dbm_to_watts(self.noise_dbm)

    def to_json(self) -> str:
        d = asdict(self)
        if math.isinf(d["rician_k_db"]):
            d["rician_k_db"] = None
        return json.dumps(d, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SystemConfig":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        if raw.get("rician_k_db") is None and "rician_k_db" in raw:
            raw["rician_k_db"] = math.inf
        for key in ("user_angles_deg", "target_angles_deg", "distance_range_m"):
            if key in raw:
                raw[key] = tuple(raw[key])
        try:
            return cls(**raw)
        except TypeError as exc:
            raise ConfigError(f"bad config value: {exc}") from exc


def load_config(path) -> SystemConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return SystemConfig.from_json(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


@dataclass(frozen=True)
class Scenario:
    """One realisation of channels and uncertainty sets for a config."""

    config: SystemConfig
    seed: int
    geometry: ArrayGeometry
    channels: ChannelSet
    target_uncertainty: tuple
    distances_m: np.ndarray
    user_angles: np.ndarray    # radians
    target_angles: np.ndarray  # radians, interval centres

    @property
    def num_users(self) -> int:
        return self.config.num_users

    @property
    def num_targets(self) -> int:
        return self.config.num_targets

    @property
    def num_streams(self) -> int:
        return self.config.num_users + self.config.num_targets


def make_scenario(config: SystemConfig, seed: int) -> Scenario:
    """Deterministically generate a scenario from (config, seed).

    Only the user distances are random; channels are line of sight toward the
    configured angles unless a finite Rician K-factor is set.
    """
    rng = np.random.default_rng(seed)
    geometry = ArrayGeometry(config.num_antennas)
    pathloss = PathLossModel(config.pathloss_ref_db, config.pathloss_exponent)
    user_angles = np.deg2rad(np.asarray(config.user_angles_deg, dtype=float))
    target_angles = np.deg2rad(np.asarray(config.target_angles_deg, dtype=float))
    lo, hi = config.distance_range_m
    distances = rng.uniform(lo, hi, config.num_users)
    estimates = np.stack([
        synth_channel(distances[k], user_angles[k], pathloss, geometry,
                      rician_k_db=config.rician_k_db, rng=rng)
        for k in range(config.num_users)
    ]) if config.num_users else np.zeros((0, config.num_antennas), dtype=complex)
    radii = config.varpi * np.linalg.norm(estimates, axis=1)
    noise = np.full(config.num_users, config.noise_power)
    channels = ChannelSet(estimates, radii, noise)
    half = math.radians(config.delta_theta_deg) / 2.0
    uncerts = tuple(
        AngleUncertainty.from_interval(th - half, th + half,
                                       config.hull_samples, geometry)
        for th in target_angles
    )
    return Scenario(config=config, seed=seed, geometry=geometry,
                    channels=channels, target_uncertainty=uncerts,
                    distances_m=distances, user_angles=user_angles,
                    target_angles=target_angles)


def collapse_uncertainty(scenario: Scenario) -> Scenario:
    """Same scenario with point estimates: zero CSI error, midpoint angles."""
    channels = ChannelSet(scenario.channels.estimates,
                          np.zeros(scenario.num_users),
                          scenario.channels.noise_powers)
    uncerts = tuple(
        AngleUncertainty.from_interval(
            0.5 * (u.interval_min + u.interval_max),
            0.5 * (u.interval_min + u.interval_max),
            1, scenario.geometry)
        for u in scenario.target_uncertainty
    )
    config = replace(scenario.config, varpi=0.0, delta_theta_deg=0.0,
                     hull_samples=1)
    return replace(scenario, config=config, channels=channels,
                   target_uncertainty=uncerts)
