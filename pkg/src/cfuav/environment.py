"""The clustering/power-allocation MDP: action projection, reward, user churn.

One Environment instance is a single-owner state machine; reset() and
step() must be called sequentially. A step processes the agent's raw action
matrix (fractions of p_max per link) in a fixed order: project, derive
clusters, evaluate the link budget and per-user outage, score the reward,
then advance the world (mobility, LOS redraw, departures, arrivals).
Identical (config, seed, action sequence) produce bitwise-identical
outcomes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import channel, mobility, outage
from .config import ScenarioConfig, eps_max_at
from .mobility import UavKinematics
from .rng import RandomSource


class InputRangeError(ValueError):
    """Raw action entries outside [0, 1]."""


@dataclass
class NetworkState:
    t: int
    uavs: list[UavKinematics]
    los: np.ndarray  # (n_max, K) bool
    prev_clusters: list[frozenset[int]]

    def uav_xy(self) -> np.ndarray:
        return np.array([[u.x, u.y] for u in self.uavs])

    def active_flags(self) -> np.ndarray:
        return np.array([u.active for u in self.uavs])


@dataclass
class StepOutcome:
    eps: np.ndarray                  # (n_max,) outage probabilities (0 for inactive)
    clusters: list[frozenset[int]]
    q1: float                        # fraction of active users whose cluster changed
    q2: float                        # fraction of active users violating their eps_max
    q3: float                        # total power over K * p_oru_budget
    reward: float
    violations: list[int] = field(default_factory=list)  # unserved active slots
    active: np.ndarray = None        # activity at reward time
    in_zone: np.ndarray = None       # true position inside a reliability zone
    changed: np.ndarray = None       # per-slot cluster-change flags


def project_action(raw, active: np.ndarray, config: ScenarioConfig) -> np.ndarray:
    """Map raw [0,1] fractions to feasible powers.

    Scales by p_max, zeroes rows of inactive users (the action mask), then
    rescales any ORU column whose sum exceeds the per-ORU budget.
    """
    raw = np.asarray(raw, dtype=float)
    expected = (config.n_max_users, config.n_orus)
    if raw.shape != expected:
        raise InputRangeError(f"action shape {raw.shape} != {expected}")
    if not np.all(np.isfinite(raw)) or raw.min() < 0.0 or raw.max() > 1.0:
        raise InputRangeError("raw action entries must lie in [0, 1]")
    power = raw * config.p_max_w
    power[~active] = 0.0
    col = power.sum(axis=0)
    over = col > config.p_oru_budget_w
    if np.any(over):
        power[:, over] *= config.p_oru_budget_w / col[over]
    return power


def derive_clusters(power_w: np.ndarray, config: ScenarioConfig) -> list[frozenset[int]]:
    """Serving set per user slot: ORUs delivering more than the cluster threshold."""
    mask = power_w > config.cluster_power_threshold_w
    return [frozenset(np.flatnonzero(row)) for row in mask]


def build_observation(state: NetworkState, config: ScenarioConfig,
                      observed_xy: np.ndarray) -> np.ndarray:
    """Flat observation: per slot [active, x, y, K LOS bits, zone flag].

    Positions are the observed (noisy) ones, normalized and clamped to
    [0, 1]; the zone flag marks whether the observed point lies inside any
    reliability zone.
    """
    k = config.n_orus
    obs = np.zeros(config.n_max_users * (k + 4))
    for i, uav in enumerate(state.uavs):
        base = i * (k + 4)
        obs[base] = 1.0 if uav.active else 0.0
        x, y = observed_xy[i]
        obs[base + 1] = min(max(x / config.area_x_m, 0.0), 1.0)
        obs[base + 2] = min(max(y / config.area_y_m, 0.0), 1.0)
        obs[base + 3:base + 3 + k] = state.los[i].astype(float)
        obs[base + 3 + k] = 1.0 if any(z.contains(x, y) for z in config.zones) else 0.0
    return obs


def observation_length(config: ScenarioConfig) -> int:
    return config.n_max_users * (config.n_orus + 4)


class Environment:
    """Single-owner MDP over one scenario configuration."""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.state: NetworkState | None = None
        self._mob_rngs: list[RandomSource] = []
        self._los_rng = None
        self._arrivals_rng = None
        self._obs_rng = None

    # -- episode control ---------------------------------------------------

    def reset(self, seed: int) -> tuple[NetworkState, np.ndarray]:
        """Start an episode: every slot active at a uniform random position."""
        cfg = self.config
        reset_rng = RandomSource(seed, "reset")
        self._mob_rngs = [RandomSource(seed, "mobility", entity=i)
                          for i in range(cfg.n_max_users)]
        self._los_rng = RandomSource(seed, "los")
        self._arrivals_rng = RandomSource(seed, "arrivals")
        self._obs_rng = RandomSource(seed, "obs_noise")

        uavs = []
        for _ in range(cfg.n_max_users):
            x = reset_rng.uniform(0.0, cfg.area_x_m)
            y = reset_rng.uniform(0.0, cfg.area_y_m)
            wx = reset_rng.uniform(0.0, cfg.area_x_m)
            wy = reset_rng.uniform(0.0, cfg.area_y_m)
            uavs.append(UavKinematics(x=x, y=y, vx=0.0, vy=0.0,
                                      wx=wx, wy=wy, active=True))
        state = NetworkState(
            t=0,
            uavs=uavs,
            los=np.zeros((cfg.n_max_users, cfg.n_orus), dtype=bool),
            prev_clusters=[frozenset() for _ in range(cfg.n_max_users)],
        )
        state.los = channel.draw_los(cfg, state.uav_xy(), self._los_rng)
        self.state = state
        return state, self._observe()

    def step(self, raw_action) -> tuple[NetworkState, np.ndarray, StepOutcome, bool]:
        if self.state is None:
            raise RuntimeError("step before reset")
        cfg = self.config
        state = self.state
        active = state.active_flags()

        power = project_action(raw_action, active, cfg)
        clusters = derive_clusters(power, cfg)
        budget = channel.link_budget(state, power, cfg)
        alpha, beta = budget.alpha, budget.beta

        eps = np.zeros(cfg.n_max_users)
        violations = []
        for i in range(cfg.n_max_users):
            if not active[i]:
                continue
            serving = alpha[i, sorted(clusters[i])] if clusters[i] else np.empty(0)
            serving = serving[serving > 0.0]  # underflowed links contribute nothing
            if serving.size:
                means = outage.perturb_distinct(serving)
                eps[i] = outage.outage_probability(means, cfg.gamma_th_linear, beta[i])
            else:
                eps[i] = 1.0  # unserved: certain outage
                if not clusters[i]:
                    violations.append(i)

        outcome = self._score(state, power, clusters, eps, active, violations)
        self._advance_world(clusters, active)
        done = state.t >= cfg.episode_len
        return state, self._observe(), outcome, done

    # -- internals ----------------------------------------------------------

    def _score(self, state, power, clusters, eps, active, violations) -> StepOutcome:
        cfg = self.config
        alt = cfg.mobility.altitude_m
        n_act = int(active.sum())

        changed = np.zeros(cfg.n_max_users, dtype=bool)
        in_zone = np.zeros(cfg.n_max_users, dtype=bool)
        violate = np.zeros(cfg.n_max_users, dtype=bool)
        for i, uav in enumerate(state.uavs):
            if not active[i]:
                continue
            changed[i] = clusters[i] != state.prev_clusters[i]
            limit = eps_max_at(cfg, (uav.x, uav.y, alt))
            violate[i] = eps[i] > limit
            in_zone[i] = any(z.contains(uav.x, uav.y) for z in cfg.zones)

        denom = cfg.n_orus * cfg.p_oru_budget_w
        # clamp: column rescaling can overshoot the budget by ~1 ulp
        q3 = min(float(power.sum() / denom), 1.0) if denom > 0 else 0.0
        w1, w2, w3 = cfg.reward_weights
        if n_act > 0:
            q1 = float(np.count_nonzero(changed & active) / n_act)
            q2 = float(np.count_nonzero(violate & active) / n_act)
            stability = np.count_nonzero(active & ~changed) / n_act
        else:
            q1 = q2 = stability = 0.0
        reward = w1 * stability - w2 * q2 + (1.0 - w3 * q3)
        return StepOutcome(eps=eps, clusters=clusters, q1=q1, q2=q2, q3=q3,
                           reward=reward, violations=violations,
                           active=active.copy(), in_zone=in_zone, changed=changed)

    def _advance_world(self, clusters, active) -> None:
        cfg = self.config
        state = self.state
        dt = cfg.step_duration_s
        new_prev = list(clusters)

        for i, uav in enumerate(state.uavs):
            if uav.active:
                state.uavs[i] = mobility.mobility_step(
                    uav, cfg.mobility, cfg.area_x_m, cfg.area_y_m, dt,
                    self._mob_rngs[i])

        state.los = channel.draw_los(cfg, state.uav_xy(), self._los_rng)

        # Departures: random switch-off, or leaving the service area.
        for i, uav in enumerate(state.uavs):
            if not uav.active:
                continue
            leave = self._arrivals_rng.random() < cfg.departure_prob
            outside = not (0.0 <= uav.x <= cfg.area_x_m and 0.0 <= uav.y <= cfg.area_y_m)
            if leave or outside:
                state.uavs[i] = mobility.UavKinematics(
                    uav.x, uav.y, uav.vx, uav.vy, uav.wx, uav.wy, active=False)
                new_prev[i] = frozenset()

        # Arrivals: inactive slots re-enter at a uniform point on the boundary.
        for i, uav in enumerate(state.uavs):
            if uav.active:
                continue
            if self._arrivals_rng.random() < cfg.arrival_prob:
                x, y = self._boundary_point()
                wx = self._arrivals_rng.uniform(0.0, cfg.area_x_m)
                wy = self._arrivals_rng.uniform(0.0, cfg.area_y_m)
                state.uavs[i] = mobility.UavKinematics(
                    x, y, 0.0, 0.0, wx, wy, active=True)
                new_prev[i] = frozenset()
                # Fresh LOS row for the spawned slot (its old row is stale).
                d2, _ = channel.link_distances(cfg, state.uav_xy()[i:i + 1])
                prob = channel.los_probability(d2[0], cfg.mobility.altitude_m)
                state.los[i] = self._arrivals_rng.random(cfg.n_orus) < prob

        state.prev_clusters = new_prev
        state.t += 1

    def _boundary_point(self) -> tuple[float, float]:
        x_len, y_len = self.config.area_x_m, self.config.area_y_m
        u = self._arrivals_rng.uniform(0.0, 2.0 * (x_len + y_len))
        if u < x_len:
            return u, 0.0
        u -= x_len
        if u < y_len:
            return x_len, u
        u -= y_len
        if u < x_len:
            return x_len - u, y_len
        return 0.0, y_len - (u - x_len)

    def _observe(self) -> np.ndarray:
        cfg = self.config
        observed = np.zeros((cfg.n_max_users, 2))
        for i, uav in enumerate(self.state.uavs):
            if uav.active:
                px, py, _ = mobility.observed_position(uav, cfg.mobility, self._obs_rng)
            else:
                px, py = uav.x, uav.y  # stale truth; no noise draw for inactive slots
            observed[i] = (px, py)
        return build_observation(self.state, cfg, observed)
