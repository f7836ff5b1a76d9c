"""Masked soft actor-critic training against the environment protocol.

Per iteration: sample a stochastic action from the squashed-Gaussian
policy, zero the rows of inactive user slots (the mask read from the
observation's activity flags), transmit the masked matrix, store the
transition, and run SAC updates (twin critics, soft target updates,
automatic entropy temperature) at the configured cadence. On endpoint
loss, a checkpoint is written before the error propagates.
"""
from __future__ import annotations

import csv
from collections import deque
from pathlib import Path

import numpy as np
import torch

from .client import EnvClient, ProtocolError
from .config import TrainerConfig
from .nets import Critic, SquashedGaussianPolicy, soft_update
from .replay import ReplayBuffer


class MaskedSacTrainer:
    def __init__(self, cfg: TrainerConfig, client: EnvClient | None = None,
                 record_transmissions: bool = False):
        self.cfg = cfg
        if cfg.torch_threads:
            torch.set_num_threads(cfg.torch_threads)
        torch.manual_seed(cfg.seed)
        self.np_rng = np.random.default_rng(cfg.seed)

        self.client = client or EnvClient(cfg.endpoint)
        hello = self.client.hello()  # refuses to start on dimension mismatch
        self.n_max, self.n_orus = hello["n_max"], hello["k"]
        self.obs_dim = hello["obs_len"]
        self.act_dim = self.n_max * self.n_orus

        widths = cfg.network_widths
        self.policy = SquashedGaussianPolicy(self.obs_dim, self.act_dim, widths)
        self.q1 = Critic(self.obs_dim, self.act_dim, widths)
        self.q2 = Critic(self.obs_dim, self.act_dim, widths)
        self.q1_target = Critic(self.obs_dim, self.act_dim, widths)
        self.q2_target = Critic(self.obs_dim, self.act_dim, widths)
        self.q1_target.load_state_dict(self.q1.state_dict())
        self.q2_target.load_state_dict(self.q2.state_dict())

        lr = cfg.learning_rate
        self.policy_opt = torch.optim.Adam(self.policy.parameters(), lr=lr)
        self.critic_opt = torch.optim.Adam(
            list(self.q1.parameters()) + list(self.q2.parameters()), lr=lr)
        self.log_alpha = torch.tensor(float(np.log(cfg.entropy_initial)),
                                      requires_grad=True)
        self.alpha_opt = torch.optim.Adam([self.log_alpha], lr=lr)
        self.target_entropy = -float(self.act_dim)

        self.replay = ReplayBuffer(cfg.replay_capacity, self.obs_dim,
                                   self.n_max, self.n_orus)
        self.iteration = 0
        self.episode = 0
        self.transmit_log: list[np.ndarray] | None = [] if record_transmissions else None

        self._ckpt_dir = Path(cfg.checkpoint_dir)
        self._curve_path = self._ckpt_dir / "training_curve.csv"
        self._window = deque(maxlen=cfg.eval_interval)

    # -- acting ------------------------------------------------------------------

    @property
    def alpha(self) -> float:
        return float(self.log_alpha.detach().exp())

    def _mask_from(self, obs: np.ndarray) -> np.ndarray:
        stride = self.n_orus + 4
        return (obs[::stride][: self.n_max] > 0.5).astype(np.float64)

    def _act(self, obs: np.ndarray) -> np.ndarray:
        if self.iteration < self.cfg.warmup_steps:
            flat = self.np_rng.uniform(0.0, 1.0, self.act_dim)
        else:
            with torch.no_grad():
                action, _ = self.policy.sample(
                    torch.as_tensor(obs, dtype=torch.float32).unsqueeze(0))
            flat = action.squeeze(0).numpy().astype(np.float64)
        return flat.reshape(self.n_max, self.n_orus)

    def _masked_batch(self, actions: torch.Tensor, obs: torch.Tensor) -> torch.Tensor:
        stride = self.n_orus + 4
        mask = (obs[:, ::stride][:, : self.n_max] > 0.5).float()
        shaped = actions.view(-1, self.n_max, self.n_orus) * mask.unsqueeze(-1)
        return shaped.view(-1, self.act_dim)

    # -- learning -------------------------------------------------------------------

    def update(self) -> dict:
        cfg = self.cfg
        obs, act, rew, nxt, done = self.replay.sample(
            min(cfg.batch_size, self.replay.size), self.np_rng)
        obs = torch.as_tensor(obs)
        act = torch.as_tensor(act)
        rew = torch.as_tensor(rew)
        nxt = torch.as_tensor(nxt)
        done = torch.as_tensor(done)
        alpha = self.log_alpha.exp().detach()

        with torch.no_grad():
            next_act, next_logp = self.policy.sample(nxt)
            next_act = self._masked_batch(next_act, nxt)
            target_q = torch.min(self.q1_target(nxt, next_act),
                                 self.q2_target(nxt, next_act))
            y = rew + cfg.gamma * (1.0 - done) * (target_q - alpha * next_logp)

        critic_loss = ((self.q1(obs, act) - y).pow(2).mean()
                       + (self.q2(obs, act) - y).pow(2).mean())
        self.critic_opt.zero_grad()
        critic_loss.backward()
        self.critic_opt.step()

        new_act, logp = self.policy.sample(obs)
        new_act_masked = self._masked_batch(new_act, obs)
        q_new = torch.min(self.q1(obs, new_act_masked),
                          self.q2(obs, new_act_masked))
        policy_loss = (alpha * logp - q_new).mean()
        self.policy_opt.zero_grad()
        policy_loss.backward()
        self.policy_opt.step()

        if cfg.entropy_coefficient_mode == "auto":
            alpha_loss = -(self.log_alpha
                           * (logp.detach() + self.target_entropy)).mean()
            self.alpha_opt.zero_grad()
            alpha_loss.backward()
            self.alpha_opt.step()

        soft_update(self.q1_target, self.q1, cfg.soft_update_tau)
        soft_update(self.q2_target, self.q2, cfg.soft_update_tau)
        return {"critic_loss": critic_loss.item(), "policy_loss": policy_loss.item(),
                "alpha": self.alpha}

    # -- training loop ----------------------------------------------------------------

    def _env_seed(self) -> int:
        return self.cfg.seed + self.episode

    def train(self, total_iterations: int | None = None) -> dict:
        cfg = self.cfg
        total = total_iterations or cfg.total_iterations
        self._ckpt_dir.mkdir(parents=True, exist_ok=True)
        if not self._curve_path.exists():
            with open(self._curve_path, "w", newline="") as handle:
                csv.writer(handle).writerow(
                    ["iteration", "mean_reward", "mean_q1", "mean_q2",
                     "mean_q3", "alpha"])

        obs = self.client.reset(self._env_seed())
        try:
            for _ in range(total):
                action = self._act(obs)
                mask = self._mask_from(obs)
                sent = action * mask[:, None]
                if self.transmit_log is not None:
                    self.transmit_log.append(sent.copy())
                reply = self.client.step(sent)
                self.replay.add(obs, sent, mask, reply["reward"],
                                reply["obs"], reply["done"])
                self._window.append(
                    (reply["reward"], reply["q1"], reply["q2"], reply["q3"]))
                obs = reply["obs"]
                if reply["done"]:
                    self.episode += 1
                    obs = self.client.reset(self._env_seed())

                self.iteration += 1
                if (self.iteration >= cfg.warmup_steps
                        and self.iteration % cfg.update_every == 0
                        and self.replay.size >= min(cfg.batch_size, 2 * cfg.warmup_steps)):
                    self.update()
                if self.iteration % cfg.eval_interval == 0:
                    self._log_curve()
                if self.iteration % cfg.checkpoint_interval == 0:
                    self.save_checkpoint(self._ckpt_dir / f"ckpt_{self.iteration}.pt")
        except (ProtocolError, BrokenPipeError) as exc:
            path = self._ckpt_dir / "ckpt_abort.pt"
            self.save_checkpoint(path)
            raise ProtocolError(f"endpoint lost at iteration {self.iteration}; "
                                f"checkpoint saved to {path}") from exc

        final = self._ckpt_dir / "ckpt_final.pt"
        self.save_checkpoint(final)
        return {"iterations": self.iteration, "episodes": self.episode,
                "checkpoint": str(final)}

    def _log_curve(self) -> None:
        if not self._window:
            return
        window = np.asarray(self._window)
        with open(self._curve_path, "a", newline="") as handle:
            csv.writer(handle).writerow([
                self.iteration,
                f"{window[:, 0].mean():.17g}", f"{window[:, 1].mean():.17g}",
                f"{window[:, 2].mean():.17g}", f"{window[:, 3].mean():.17g}",
                f"{self.alpha:.17g}",
            ])

    # -- persistence --------------------------------------------------------------------

    def save_checkpoint(self, path) -> None:
        torch.save({
            "policy": self.policy.state_dict(),
            "q1": self.q1.state_dict(),
            "q2": self.q2.state_dict(),
            "q1_target": self.q1_target.state_dict(),
            "q2_target": self.q2_target.state_dict(),
            "log_alpha": self.log_alpha.detach().clone(),
            "iteration": self.iteration,
            "n_max": self.n_max,
            "n_orus": self.n_orus,
            "obs_dim": self.obs_dim,
            "network_widths": list(self.cfg.network_widths),
        }, path)


def load_policy(checkpoint_path):
    """Rebuild the policy (and dims) from a checkpoint for evaluation."""
    ckpt = torch.load(checkpoint_path, weights_only=True)
    policy = SquashedGaussianPolicy(ckpt["obs_dim"],
                                    ckpt["n_max"] * ckpt["n_orus"],
                                    tuple(ckpt["network_widths"]))
    policy.load_state_dict(ckpt["policy"])
    policy.eval()
    return policy, ckpt
