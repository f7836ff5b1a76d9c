"""Reference clustering policies: Closest and Opportunistic.

Both return raw action matrices (fractions of p_max per link) that flow
through the environment's projection like any agent action, so their
outcomes are directly comparable with learned policies.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import channel
from .config import ScenarioConfig
from .environment import NetworkState


@dataclass(frozen=True)
class OpportunisticConfig:
    # Links within this margin of the user's best mean gain join the cluster.
    inclusion_margin_db: float = 10.0


def closest_policy(state: NetworkState, config: ScenarioConfig) -> np.ndarray:
    """Nearest ORU serves each active user at full per-link power.

    Ties on distance resolve to the lowest ORU index.
    """
    raw = np.zeros((config.n_max_users, config.n_orus))
    orus = config.oru_array()
    alt = config.mobility.altitude_m
    for i, uav in enumerate(state.uavs):
        if not uav.active:
            continue
        d = np.linalg.norm(orus - np.array([uav.x, uav.y, alt]), axis=1)
        raw[i, int(np.argmin(d))] = 1.0
    return raw


def opportunistic_policy(state: NetworkState, config: ScenarioConfig,
                         opp: OpportunisticConfig = OpportunisticConfig()) -> np.ndarray:
    """Channel-gain clustering with equal per-ORU budget splitting.

    Every ORU whose mean channel gain (peak array gain times path gain) is
    within `inclusion_margin_db` of the user's best link joins that user's
    cluster. Each ORU splits its power budget equally among the users that
    selected it, capped at p_max per link.
    """
    raw = np.zeros((config.n_max_users, config.n_orus))
    active = state.active_flags()
    if not active.any():
        return raw
    peak = config.array.g0_linear * config.array.n_elements
    gains = peak * channel.path_gain_matrix(config, state.uav_xy(), state.los)

    margin = 10.0 ** (opp.inclusion_margin_db / 10.0)
    member = np.zeros_like(raw, dtype=bool)
    for i in range(config.n_max_users):
        if active[i]:
            member[i] = gains[i] >= gains[i].max() / margin

    counts = member.sum(axis=0)
    for k in np.flatnonzero(counts):
        share = min(config.p_oru_budget_w / counts[k], config.p_max_w)
        raw[member[:, k], k] = share / config.p_max_w
    return raw
