"""Ring-buffer replay of masked transitions."""
from __future__ import annotations

import numpy as np


class ReplayBuffer:
    """Fixed-capacity uniform-sampling replay.

    Stored actions are the transmitted (already masked) ones; the mask is
    kept alongside so audits can re-check the contract at any time.
    """

    def __init__(self, capacity: int, obs_dim: int, n_max: int, n_orus: int):
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_dim), dtype=np.float32)
        self.action = np.zeros((capacity, n_max * n_orus), dtype=np.float32)
        self.mask = np.zeros((capacity, n_max), dtype=np.float32)
        self.reward = np.zeros(capacity, dtype=np.float32)
        self.next_obs = np.zeros((capacity, obs_dim), dtype=np.float32)
        self.done = np.zeros(capacity, dtype=np.float32)
        self.size = 0
        self._head = 0

    def add(self, obs, action, mask, reward, next_obs, done) -> None:
        i = self._head
        self.obs[i] = obs
        self.action[i] = np.asarray(action).reshape(-1)
        self.mask[i] = mask
        self.reward[i] = reward
        self.next_obs[i] = next_obs
        self.done[i] = float(done)
        self._head = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator):
        idx = rng.integers(0, self.size, batch_size)
        return (self.obs[idx], self.action[idx], self.reward[idx],
                self.next_obs[idx], self.done[idx])

    def audit_masking(self, n_orus: int) -> int:
        """Number of stored transitions whose action violates the mask
        (any nonzero entry in a row flagged inactive)."""
        rows = self.action[: self.size].reshape(self.size, -1, n_orus)
        inactive = self.mask[: self.size] < 0.5
        violations = (np.abs(rows) > 0.0).any(axis=2) & inactive
        return int(violations.any(axis=1).sum())
