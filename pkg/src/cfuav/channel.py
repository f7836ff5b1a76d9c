"""Link-level radio model: LOS state, path loss, mean link powers, interference.

Serving links experience Rayleigh fading, so the instantaneous received
power of link (i, k) is exponential with mean alpha[i, k] = P_T * G * PL.
Interference enters at its expected fading power (Rayleigh mean), which
makes the interference-plus-noise level beta deterministic given positions
and powers, and the closed-form outage of `outage` exact.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import antenna
from .config import ScenarioConfig


@dataclass(frozen=True)
class LinkBudget:
    alpha: np.ndarray  # (n_max, K) mean received powers, watts
    beta: np.ndarray   # (n_max,) interference-plus-noise, watts (noise included)


def los_probability(d_2d_m, uav_alt_m: float):
    """LOS probability of a ground-to-air link vs horizontal distance.

    At or above 100 m altitude the link is always LOS. Below, a piecewise
    model applies with altitude clamped to [22.5, 100]:
        p1 = 233.98*log10(h) - 0.95
        d1 = max(294.05*log10(h) - 432.94, 18)
        P_LOS = 1                                   for d <= d1
              = d1/d + exp(-d/p1) * (1 - d1/d)      otherwise
    Accepts scalars or arrays in `d_2d_m`.
    """
    d = np.asarray(d_2d_m, dtype=float)
    if np.any(d < 0):
        raise ValueError("d_2d_m must be nonnegative")
    if uav_alt_m >= 100.0:
        out = np.ones_like(d)
        return float(out) if np.isscalar(d_2d_m) else out
    h = min(max(float(uav_alt_m), 22.5), 100.0)
    p1 = 233.98 * np.log10(h) - 0.95
    d1 = max(294.05 * np.log10(h) - 432.94, 18.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        far = d1 / d + np.exp(-d / p1) * (1.0 - d1 / d)
    out = np.where(d <= d1, 1.0, far)
    return float(out) if np.isscalar(d_2d_m) else out


def path_gain(d_3d_m, carrier_hz: float, los, uav_alt_m: float):
    """Linear path power gain in (0, 1] for 3D distance(s) >= 1 m.

    LOS:  PL_dB = 28.0 + 22*log10(d) + 20*log10(f_GHz)
    NLOS: PL_dB = max(PL_LOS, 13.54 + 39.08*log10(d) + 20*log10(f_GHz)
                               - 0.6*(h_ut - 1.5))
    `los` may be a boolean scalar or array broadcastable with `d_3d_m`.
    """
    d = np.asarray(d_3d_m, dtype=float)
    if np.any(d < 1.0):
        raise ValueError("d_3d_m below the 1 m model validity floor")
    f_ghz = carrier_hz / 1e9
    pl_los = 28.0 + 22.0 * np.log10(d) + 20.0 * np.log10(f_ghz)
    pl_nlos = np.maximum(
        pl_los,
        13.54 + 39.08 * np.log10(d) + 20.0 * np.log10(f_ghz) - 0.6 * (uav_alt_m - 1.5),
    )
    pl = np.where(np.asarray(los, dtype=bool), pl_los, pl_nlos)
    gain = np.minimum(10.0 ** (-pl / 10.0), 1.0)
    return float(gain) if np.isscalar(d_3d_m) and np.isscalar(los) else gain


def link_distances(config: ScenarioConfig, uav_xy: np.ndarray):
    """(d_2d, d_3d) matrices of shape (n_max, K) from user xy positions."""
    orus = config.oru_array()
    alt = config.mobility.altitude_m
    dx = uav_xy[:, 0:1] - orus[None, :, 0]
    dy = uav_xy[:, 1:2] - orus[None, :, 1]
    dz = alt - orus[None, :, 2]
    d2 = np.hypot(dx, dy)
    d3 = np.sqrt(d2 * d2 + dz * dz)
    return d2, np.maximum(d3, 1.0)


def draw_los(config: ScenarioConfig, uav_xy: np.ndarray, rng) -> np.ndarray:
    """Redraw the (n_max, K) LOS matrix; links are i.i.d. across steps."""
    d2, _ = link_distances(config, uav_xy)
    prob = los_probability(d2, config.mobility.altitude_m)
    return rng.random(d2.shape) < prob


def path_gain_matrix(config: ScenarioConfig, uav_xy: np.ndarray,
                     los: np.ndarray) -> np.ndarray:
    _, d3 = link_distances(config, uav_xy)
    return path_gain(d3, config.carrier_hz, los, config.mobility.altitude_m)


def link_means(state, power_w: np.ndarray, config: ScenarioConfig) -> np.ndarray:
    """Mean received serving powers alpha[i, k] = P_T,ik * G_peak * PL_ik.

    Each serving beam is steered at its own user, so the array gain is the
    peak g0 * L. Rows of inactive user slots are zero.
    """
    pg = path_gain_matrix(config, state.uav_xy(), state.los)
    return _alpha_from(state, power_w, config, pg)


def interference_noise(state, power_w: np.ndarray, config: ScenarioConfig) -> np.ndarray:
    """Interference-plus-noise beta[i] = sigma^2 + sum over other users' beams.

    Power from ORU k's beam toward user n reaches victim i through the
    victim's own path attenuation PL_ik, scaled by the cross-beam gain. The
    cross gain follows config.interference_gain_mode:
      - "steered_at_victim": gain of the n-steered beam evaluated at i;
      - "serving_beam_peak": the beam's peak gain g0 * L.
    """
    pg = path_gain_matrix(config, state.uav_xy(), state.los)
    return _beta_from(state, power_w, config, pg)


def link_budget(state, power_w: np.ndarray, config: ScenarioConfig) -> LinkBudget:
    """alpha and beta in one pass (shared path-gain evaluation)."""
    pg = path_gain_matrix(config, state.uav_xy(), state.los)
    return LinkBudget(alpha=_alpha_from(state, power_w, config, pg),
                      beta=_beta_from(state, power_w, config, pg))


def _alpha_from(state, power_w, config, pg) -> np.ndarray:
    peak = config.array.g0_linear * config.array.n_elements
    alpha = power_w * peak * pg
    alpha[~state.active_flags()] = 0.0
    return alpha


def _beta_from(state, power_w, config, pg) -> np.ndarray:
    xy = state.uav_xy()
    active = state.active_flags()
    power = np.where(active[:, None], power_w, 0.0)
    sigma2 = config.noise_power_w

    if config.interference_gain_mode == "serving_beam_peak":
        peak = config.array.g0_linear * config.array.n_elements
        col_sum = power.sum(axis=0)
        inter = peak * (pg * (col_sum[None, :] - power)).sum(axis=1)
    else:
        alt = config.mobility.altitude_m
        pos3 = np.column_stack([xy, np.full(len(xy), alt)])
        cos_t, sinsin = antenna.direction_cosines(config.oru_array(), pos3)
        gain = antenna.pairwise_interference_gain(
            cos_t, sinsin, config.array, config.wavenumber_rad_m)  # (i, n, k)
        np.einsum("iik->ik", gain)[:] = 0.0  # exclude each user's own beams
        inter = np.einsum("ik,ink,nk->i", pg, gain, power)

    return sigma2 + inter
