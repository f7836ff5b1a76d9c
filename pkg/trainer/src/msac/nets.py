"""Policy and critic networks.

The policy is a squashed Gaussian: u ~ N(mu, sigma) elementwise, mapped to
the unit interval by a = (tanh(u) + 1) / 2. Log-densities carry the change
of variables log|da/du| = log(1 - tanh(u)^2) - log 2 per dimension.
"""
from __future__ import annotations

import math

import torch
import torch.nn as nn

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0
_EPS = 1e-8


def mlp(sizes, out_dim):
    layers = []
    for a, b in zip(sizes, sizes[1:]):
        layers += [nn.Linear(a, b), nn.ReLU()]
    layers.append(nn.Linear(sizes[-1], out_dim))
    return nn.Sequential(*layers)


class SquashedGaussianPolicy(nn.Module):
    def __init__(self, obs_dim: int, act_dim: int, widths=(256, 256)):
        super().__init__()
        self.net = mlp((obs_dim, *widths), 2 * act_dim)
        self.act_dim = act_dim

    def _dist_params(self, obs):
        mu, log_std = self.net(obs).chunk(2, dim=-1)
        return mu, log_std.clamp(LOG_STD_MIN, LOG_STD_MAX)

    def sample(self, obs):
        """Stochastic action in [0,1]^act_dim and its log-density."""
        mu, log_std = self._dist_params(obs)
        std = log_std.exp()
        noise = torch.randn_like(mu)
        u = mu + std * noise
        tanh_u = torch.tanh(u)
        action = 0.5 * (tanh_u + 1.0)
        log_prob = (-0.5 * noise.pow(2) - log_std - 0.5 * math.log(2 * math.pi)
                    - torch.log(1.0 - tanh_u.pow(2) + _EPS) + math.log(2.0))
        return action, log_prob.sum(dim=-1)

    def mean_action(self, obs):
        """Deterministic action: squashed distribution mode."""
        mu, _ = self._dist_params(obs)
        return 0.5 * (torch.tanh(mu) + 1.0)


class Critic(nn.Module):
    def __init__(self, obs_dim: int, act_dim: int, widths=(256, 256)):
        super().__init__()
        self.net = mlp((obs_dim + act_dim, *widths), 1)

    def forward(self, obs, act):
        return self.net(torch.cat([obs, act], dim=-1)).squeeze(-1)


def soft_update(target: nn.Module, online: nn.Module, tau: float) -> None:
    """target <- (1 - tau) * target + tau * online, in place."""
    with torch.no_grad():
        for tp, op in zip(target.parameters(), online.parameters()):
            tp.mul_(1.0 - tau).add_(op, alpha=tau)
