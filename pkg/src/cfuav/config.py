"""Scenario configuration: loading, validation and unit conventions.

All internal radio math is carried out in linear SI units (watts, Hz,
meters); dB/dBm values appear only in the configuration document and in
reports. Configuration objects are immutable after loading and safe to
share between threads.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SPEED_OF_LIGHT_M_S = 299792458.0

INTERFERENCE_GAIN_MODES = ("steered_at_victim", "serving_beam_peak")


class ConfigError(ValueError):
    """Malformed configuration document or violated invariant."""


@dataclass(frozen=True)
class ArrayConfig:
    """Uniform planar array at each ORU: m_z x n_y elements."""

    m_z: int = 4
    n_y: int = 4
    d_z_m: float = SPEED_OF_LIGHT_M_S / 2.4e9 / 2.0  # half wavelength at 2.4 GHz
    d_y_m: float = SPEED_OF_LIGHT_M_S / 2.4e9 / 2.0
    g0_linear: float = 1.0

    @property
    def n_elements(self) -> int:
        return self.m_z * self.n_y


@dataclass(frozen=True)
class ReliabilityZone:
    """Axis-aligned region with its own maximum tolerable outage."""

    x_range_m: tuple[float, float]
    y_range_m: tuple[float, float]
    eps_max: float

    def contains(self, x: float, y: float) -> bool:
        # Closed intervals: boundary points belong to the zone.
        return (self.x_range_m[0] <= x <= self.x_range_m[1]
                and self.y_range_m[0] <= y <= self.y_range_m[1])


@dataclass(frozen=True)
class MobilityConfig:
    theta_revert_per_s: float = 0.3     # velocity mean-reversion rate (1/s)
    sigma_accel: float = 1.0            # diffusion scale (m/s per sqrt(s))
    v_max_m_s: float = 20.0
    waypoint_dwell_s: float = 120.0     # mean time before redrawing a waypoint
    altitude_m: float = 100.0           # fixed flight altitude
    position_noise_std_m: float = 5.0   # std of reported-position noise


@dataclass(frozen=True)
class ScenarioConfig:
    area_x_m: float
    area_y_m: float
    oru_positions: tuple[tuple[float, float, float], ...]
    n_max_users: int
    array: ArrayConfig = ArrayConfig()
    carrier_hz: float = 2.4e9
    bandwidth_hz: float = 1.0e7
    noise_density_dbm_hz: float = -174.0
    gamma_th_db: float = -5.0
    p_max_w: float = 1.0                # per-link transmit power ceiling
    p_oru_budget_w: float = 1.0         # per-ORU total power budget
    cluster_power_threshold_w: float = 1.0e-3
    zones: tuple[ReliabilityZone, ...] = ()
    eps_max_default: float = 1.0e-2
    mobility: MobilityConfig = MobilityConfig()
    arrival_prob: float = 0.05
    departure_prob: float = 0.02
    reward_weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    step_duration_s: float = 1.0
    episode_len: int = 1000
    interference_gain_mode: str = "steered_at_victim"

    @property
    def n_orus(self) -> int:
        return len(self.oru_positions)

    @property
    def gamma_th_linear(self) -> float:
        return 10.0 ** (self.gamma_th_db / 10.0)

    @property
    def noise_power_w(self) -> float:
        # sigma^2 = N0 * B, with N0 given in dBm/Hz
        return 10.0 ** ((self.noise_density_dbm_hz - 30.0) / 10.0) * self.bandwidth_hz

    @property
    def wavenumber_rad_m(self) -> float:
        return 2.0 * math.pi * self.carrier_hz / SPEED_OF_LIGHT_M_S

    def oru_array(self) -> np.ndarray:
        return np.asarray(self.oru_positions, dtype=float)


def eps_max_at(config: ScenarioConfig, position) -> float:
    """Outage requirement at a 3D point (z ignored; zones are 2D).

    The first listed zone containing (x, y) wins; positions outside every
    zone (including outside the service area) fall back to eps_max_default.
    """
    x, y = float(position[0]), float(position[1])
    for zone in config.zones:
        if zone.contains(x, y):
            return zone.eps_max
    return config.eps_max_default


# --------------------------------------------------------------------------
# Document loading
# --------------------------------------------------------------------------

_TOP_KEYS = {
    "area_x_m", "area_y_m", "oru_positions", "n_max_users", "array",
    "carrier_hz", "bandwidth_hz", "noise_density_dbm_hz", "gamma_th_db",
    "p_max_w", "p_oru_budget_w", "cluster_power_threshold_w", "zones",
    "eps_max_default", "mobility", "arrival_prob", "departure_prob",
    "reward_weights", "step_duration_s", "episode_len",
    "interference_gain_mode",
}
_ARRAY_KEYS = {"m_z", "n_y", "d_z_m", "d_y_m", "g0_linear"}
_ZONE_KEYS = {"x_range_m", "y_range_m", "eps_max"}
_MOBILITY_KEYS = {"theta_revert_per_s", "sigma_accel", "v_max_m_s",
                  "waypoint_dwell_s", "altitude_m", "position_noise_std_m"}


def _reject_unknown(table: dict, allowed: set, where: str) -> None:
    for key in table:
        if key not in allowed:
            raise ConfigError(f"unknown key '{key}' in {where}")


def _require(cond: bool, invariant: str) -> None:
    if not cond:
        raise ConfigError(f"invariant violated: {invariant}")


def load_config(text: str) -> ScenarioConfig:
    """Parse and validate a scenario document (TOML). Pure: same text, same config."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"unparseable configuration document: {exc}") from exc

    _reject_unknown(doc, _TOP_KEYS, "top level")
    for key in ("area_x_m", "area_y_m", "oru_positions", "n_max_users"):
        if key not in doc:
            raise ConfigError(f"missing required key '{key}'")

    array_tbl = doc.get("array", {})
    _reject_unknown(array_tbl, _ARRAY_KEYS, "[array]")
    # Default element spacing is half the carrier wavelength.
    carrier = float(doc.get("carrier_hz", 2.4e9))
    half_wl = SPEED_OF_LIGHT_M_S / carrier / 2.0
    array = ArrayConfig(
        m_z=int(array_tbl.get("m_z", 4)),
        n_y=int(array_tbl.get("n_y", 4)),
        d_z_m=float(array_tbl.get("d_z_m", half_wl)),
        d_y_m=float(array_tbl.get("d_y_m", half_wl)),
        g0_linear=float(array_tbl.get("g0_linear", 1.0)),
    )

    mob_tbl = doc.get("mobility", {})
    _reject_unknown(mob_tbl, _MOBILITY_KEYS, "[mobility]")
    defaults = MobilityConfig()
    mobility = MobilityConfig(**{
        key: float(mob_tbl.get(key, getattr(defaults, key)))
        for key in _MOBILITY_KEYS
    })

    zones = []
    for idx, zone_tbl in enumerate(doc.get("zones", [])):
        _reject_unknown(zone_tbl, _ZONE_KEYS, f"[[zones]] #{idx}")
        for key in _ZONE_KEYS:
            if key not in zone_tbl:
                raise ConfigError(f"missing key '{key}' in [[zones]] #{idx}")
        zones.append(ReliabilityZone(
            x_range_m=tuple(float(v) for v in zone_tbl["x_range_m"]),
            y_range_m=tuple(float(v) for v in zone_tbl["y_range_m"]),
            eps_max=float(zone_tbl["eps_max"]),
        ))

    orus = []
    for idx, pos in enumerate(doc["oru_positions"]):
        if len(pos) != 3:
            raise ConfigError(f"oru_positions[{idx}] must be [x, y, z]")
        orus.append(tuple(float(v) for v in pos))

    weights = tuple(float(w) for w in doc.get("reward_weights", (1.0, 1.0, 1.0)))
    if len(weights) != 3:
        raise ConfigError("reward_weights must have exactly three entries")

    config = ScenarioConfig(
        area_x_m=float(doc["area_x_m"]),
        area_y_m=float(doc["area_y_m"]),
        oru_positions=tuple(orus),
        n_max_users=int(doc["n_max_users"]),
        array=array,
        carrier_hz=carrier,
        bandwidth_hz=float(doc.get("bandwidth_hz", 1.0e7)),
        noise_density_dbm_hz=float(doc.get("noise_density_dbm_hz", -174.0)),
        gamma_th_db=float(doc.get("gamma_th_db", -5.0)),
        p_max_w=float(doc.get("p_max_w", 1.0)),
        p_oru_budget_w=float(doc.get("p_oru_budget_w", 1.0)),
        cluster_power_threshold_w=float(doc.get("cluster_power_threshold_w", 1.0e-3)),
        zones=tuple(zones),
        eps_max_default=float(doc.get("eps_max_default", 1.0e-2)),
        mobility=mobility,
        arrival_prob=float(doc.get("arrival_prob", 0.05)),
        departure_prob=float(doc.get("departure_prob", 0.02)),
        reward_weights=weights,
        step_duration_s=float(doc.get("step_duration_s", 1.0)),
        episode_len=int(doc.get("episode_len", 1000)),
        interference_gain_mode=str(doc.get("interference_gain_mode", "steered_at_victim")),
    )
    validate(config)
    return config


def load_config_path(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as handle:
        return load_config(handle.read())


def validate(cfg: ScenarioConfig) -> None:
    _require(cfg.area_x_m > 0 and cfg.area_y_m > 0, "area dimensions must be positive")
    _require(cfg.n_orus >= 1, "K >= 1 (at least one ORU)")
    _require(cfg.n_max_users >= 1, "n_max_users >= 1")
    _require(cfg.p_max_w > 0, "p_max_w > 0")
    _require(cfg.p_oru_budget_w >= 0, "p_oru_budget_w >= 0")
    _require(cfg.cluster_power_threshold_w >= 0, "cluster_power_threshold_w >= 0")
    _require(cfg.cluster_power_threshold_w < cfg.p_max_w,
             "cluster_power_threshold_w < p_max_w")
    _require(cfg.carrier_hz > 0 and cfg.bandwidth_hz > 0, "carrier and bandwidth must be positive")
    _require(0.0 <= cfg.arrival_prob <= 1.0, "arrival_prob in [0, 1]")
    _require(0.0 <= cfg.departure_prob <= 1.0, "departure_prob in [0, 1]")
    _require(0.0 < cfg.eps_max_default < 1.0, "eps_max_default in (0, 1)")
    _require(all(w >= 0 for w in cfg.reward_weights), "reward weights nonnegative")
    _require(cfg.step_duration_s > 0, "step_duration_s > 0")
    _require(cfg.episode_len >= 1, "episode_len >= 1")
    _require(cfg.interference_gain_mode in INTERFERENCE_GAIN_MODES,
             f"interference_gain_mode in {INTERFERENCE_GAIN_MODES}")

    arr = cfg.array
    _require(arr.m_z >= 1 and arr.n_y >= 1, "array dimensions >= 1")
    _require(arr.d_z_m > 0 and arr.d_y_m > 0, "array spacings > 0")
    _require(arr.g0_linear > 0, "g0_linear > 0")

    mob = cfg.mobility
    for key in _MOBILITY_KEYS:
        if key == "position_noise_std_m":
            _require(getattr(mob, key) >= 0, f"mobility.{key} >= 0")
        else:
            _require(getattr(mob, key) > 0, f"mobility.{key} > 0")

    for idx, (x, y, _z) in enumerate(cfg.oru_positions):
        _require(0.0 <= x <= cfg.area_x_m and 0.0 <= y <= cfg.area_y_m,
                 f"oru_positions[{idx}] inside the area footprint")

    for idx, zone in enumerate(cfg.zones):
        _require(zone.x_range_m[0] <= zone.x_range_m[1]
                 and zone.y_range_m[0] <= zone.y_range_m[1],
                 f"zones[{idx}] ranges ordered")
        _require(0.0 <= zone.x_range_m[0] and zone.x_range_m[1] <= cfg.area_x_m
                 and 0.0 <= zone.y_range_m[0] and zone.y_range_m[1] <= cfg.area_y_m,
                 f"zones[{idx}] inside the area")
        _require(0.0 < zone.eps_max < 1.0, f"zones[{idx}].eps_max in (0, 1)")
