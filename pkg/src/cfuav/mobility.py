"""Stochastic UAV trajectories: OU-correlated velocity with waypoint pull.

Each UAV flies at a fixed altitude. Its 2D velocity mean-reverts toward a
desired velocity pointing at the current waypoint (at 0.8 * v_max), with
Brownian perturbations of scale sigma_accel. The velocity recursion uses
the exact one-step OU transition, so its stationary per-axis variance is
sigma^2 / (2 * theta) at any step length. Positions reflect off the area
walls; waypoints are redrawn uniformly at rate 1/waypoint_dwell_s.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .config import MobilityConfig

WAYPOINT_SPEED_FRACTION = 0.8


@dataclass(frozen=True)
class UavKinematics:
    x: float
    y: float
    vx: float
    vy: float
    wx: float  # waypoint
    wy: float
    active: bool = True

    def position(self, altitude_m: float) -> tuple[float, float, float]:
        return (self.x, self.y, altitude_m)

    @property
    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)


def ou_velocity_update(vx: float, vy: float, vdx: float, vdy: float,
                       theta: float, sigma: float, dt: float,
                       xi_x: float, xi_y: float) -> tuple[float, float]:
    """Exact one-step OU transition toward the desired velocity (vdx, vdy)."""
    decay = math.exp(-theta * dt)
    scale = sigma * math.sqrt((1.0 - decay * decay) / (2.0 * theta))
    return (vdx + (vx - vdx) * decay + scale * xi_x,
            vdy + (vy - vdy) * decay + scale * xi_y)


def _reflect(pos: float, vel: float, hi: float) -> tuple[float, float]:
    # Fold the position back into [0, hi]; each fold flips the normal velocity.
    while pos < 0.0 or pos > hi:
        if pos < 0.0:
            pos = -pos
        else:
            pos = 2.0 * hi - pos
        vel = -vel
    return pos, vel


def mobility_step(state: UavKinematics, cfg: MobilityConfig,
                  area_x_m: float, area_y_m: float, dt: float,
                  rng) -> UavKinematics:
    """Advance one UAV by dt seconds. Draws: 2 normals, 1 uniform (+2 on redraw)."""
    dist = math.hypot(state.wx - state.x, state.wy - state.y)
    if dist > 1e-12:
        v_des = WAYPOINT_SPEED_FRACTION * cfg.v_max_m_s / dist
        vdx, vdy = v_des * (state.wx - state.x), v_des * (state.wy - state.y)
    else:
        vdx = vdy = 0.0

    xi = rng.standard_normal(2)
    vx, vy = ou_velocity_update(state.vx, state.vy, vdx, vdy,
                                cfg.theta_revert_per_s, cfg.sigma_accel,
                                dt, xi[0], xi[1])
    speed = math.hypot(vx, vy)
    if speed > cfg.v_max_m_s:
        vx *= cfg.v_max_m_s / speed
        vy *= cfg.v_max_m_s / speed

    x, vx = _reflect(state.x + vx * dt, vx, area_x_m)
    y, vy = _reflect(state.y + vy * dt, vy, area_y_m)

    wx, wy = state.wx, state.wy
    if rng.random() < min(1.0, dt / cfg.waypoint_dwell_s):
        wx = rng.uniform(0.0, area_x_m)
        wy = rng.uniform(0.0, area_y_m)

    return replace(state, x=x, y=y, vx=vx, vy=vy, wx=wx, wy=wy)


def observed_position(state: UavKinematics, cfg: MobilityConfig,
                      rng) -> tuple[float, float, float]:
    """Reported position: truth plus isotropic 2D noise; altitude exact.

    Only the observation vector sees this value; channel physics always use
    the true position.
    """
    if not state.active:
        raise ValueError("observed_position requires an active UAV")
    noise = rng.standard_normal(2) * cfg.position_noise_std_m
    return (state.x + noise[0], state.y + noise[1], cfg.altitude_m)
