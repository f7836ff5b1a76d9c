"""Uniform planar array geometry: link angles, steering vectors, steered gain.

Arrays sit broadside-up with their element axes aligned to +z and +y at
every ORU. The zenith angle theta is measured from +z, the azimuth phi from
+x in the (x, y) plane. Beamformed gain uses conjugate weights normalized to
unit total weight power, so the peak gain toward the steered direction is
g0 * L.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ArrayConfig


class DegenerateGeometryError(ValueError):
    """Raised when the two endpoints of a link coincide."""


@dataclass(frozen=True)
class Direction:
    theta_rad: float  # zenith in [0, pi], from +z
    phi_rad: float    # azimuth in (-pi, pi], from +x


def direction_to(oru_position, target_position) -> Direction:
    """Direction of `target` as seen from `oru` (both 3D points in meters)."""
    dx = float(target_position[0]) - float(oru_position[0])
    dy = float(target_position[1]) - float(oru_position[1])
    dz = float(target_position[2]) - float(oru_position[2])
    horiz = math.hypot(dx, dy)
    if horiz == 0.0 and dz == 0.0:
        raise DegenerateGeometryError("ORU and target positions coincide")
    theta = math.atan2(horiz, dz)
    phi = 0.0 if horiz == 0.0 else math.atan2(dy, dx)
    if phi <= -math.pi:  # keep phi in (-pi, pi]
        phi += 2.0 * math.pi
    return Direction(theta_rad=theta, phi_rad=phi)


def steering_vector(direction: Direction, array: ArrayConfig,
                    wavenumber_rad_m: float) -> np.ndarray:
    """Length-L complex steering vector, row-major over (z-index, y-index).

    Element (m, n), m = 1..m_z, n = 1..n_y, carries the phase
    (m-1) * k * d_z * cos(theta) + (n-1) * k * d_y * sin(theta) * sin(phi).
    """
    cos_t = math.cos(direction.theta_rad)
    sinsin = math.sin(direction.theta_rad) * math.sin(direction.phi_rad)
    phase_z = wavenumber_rad_m * array.d_z_m * cos_t * np.arange(array.m_z)
    phase_y = wavenumber_rad_m * array.d_y_m * sinsin * np.arange(array.n_y)
    phases = phase_z[:, None] + phase_y[None, :]
    return np.exp(1j * phases).reshape(-1)


def axis_power_sum(delta, n: int):
    """|sum_{m=0}^{n-1} exp(j m delta)|^2, broadcast over `delta`.

    Uses the Chebyshev recurrence cos(m*d) = 2*cos(d)*cos((m-1)*d)
    - cos((m-2)*d) so each element needs a single sin/cos pair regardless
    of n.
    """
    delta = np.asarray(delta, dtype=float)
    if n == 1:
        return np.ones(delta.shape) if delta.shape else 1.0
    cos1 = np.cos(delta)
    sin1 = np.sin(delta)
    re = 1.0 + cos1
    im = sin1.copy()
    c_prev, s_prev = np.ones_like(cos1), np.zeros_like(sin1)
    c_cur, s_cur = cos1, sin1
    for _ in range(n - 2):
        c_next = 2.0 * cos1 * c_cur - c_prev
        s_next = 2.0 * cos1 * s_cur - s_prev
        re += c_next
        im += s_next
        c_prev, s_prev, c_cur, s_cur = c_cur, s_cur, c_next, s_next
    return re * re + im * im


def steered_gain(target: Direction, steer: Direction, array: ArrayConfig,
                 wavenumber_rad_m: float) -> float:
    """Array gain toward `target` when conjugate-beamformed toward `steer`.

    Returns g0 * |w^H a(target)|^2 with w = a(steer)/sqrt(L). The planar
    phase profile factorizes per axis, so the gain is the product of two
    one-axis power sums divided by L.
    """
    d_cos = math.cos(target.theta_rad) - math.cos(steer.theta_rad)
    d_sinsin = (math.sin(target.theta_rad) * math.sin(target.phi_rad)
                - math.sin(steer.theta_rad) * math.sin(steer.phi_rad))
    gz = axis_power_sum(wavenumber_rad_m * array.d_z_m * d_cos, array.m_z)
    gy = axis_power_sum(wavenumber_rad_m * array.d_y_m * d_sinsin, array.n_y)
    return float(array.g0_linear * gz * gy / array.n_elements)


def direction_cosines(oru_positions: np.ndarray, uav_positions: np.ndarray):
    """Per-link phase drivers for all (user, ORU) pairs.

    Returns (cos_theta, sin_theta_sin_phi), each of shape (N, K). These are
    the only two angle functions the planar phase profile depends on, and
    both reduce to displacement ratios: cos(theta) = dz/d3, and
    sin(theta)*sin(phi) = dy/d3 (zero for a purely vertical link).
    """
    delta = uav_positions[:, None, :] - oru_positions[None, :, :]  # (N, K, 3)
    d3 = np.linalg.norm(delta, axis=-1)
    d3 = np.where(d3 == 0.0, np.inf, d3)  # coincident points: no defined direction
    return delta[:, :, 2] / d3, delta[:, :, 1] / d3


def pairwise_interference_gain(cos_t: np.ndarray, sinsin: np.ndarray,
                               array: ArrayConfig, wavenumber_rad_m: float) -> np.ndarray:
    """Gain at victim i from ORU k's beam steered at user n, for all (i, n, k).

    Inputs are the (N, K) matrices from direction_cosines; output has shape
    (N, N, K) and equals steered_gain(target=dir(i,k), steer=dir(n,k)).
    """
    d_cos = cos_t[:, None, :] - cos_t[None, :, :]      # (i, n, k)
    d_sinsin = sinsin[:, None, :] - sinsin[None, :, :]
    gz = axis_power_sum(wavenumber_rad_m * array.d_z_m * d_cos, array.m_z)
    gy = axis_power_sum(wavenumber_rad_m * array.d_y_m * d_sinsin, array.n_y)
    return array.g0_linear * gz * gy / array.n_elements
