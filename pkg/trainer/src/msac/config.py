"""Trainer configuration (TOML)."""
from __future__ import annotations

import sys
from dataclasses import dataclass

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


@dataclass
class TrainerConfig:
    # endpoint: "tcp://host:port", or a command line that serves the
    # environment protocol on its stdio (e.g. "cfuav serve --config x.toml")
    endpoint: str = ""
    learning_rate: float = 1e-5
    batch_size: int = 32768
    soft_update_tau: float = 1e-5
    entropy_coefficient_mode: str = "auto"
    entropy_initial: float = 0.05
    total_iterations: int = 2_000_000
    replay_capacity: int = 1_000_000
    network_widths: tuple[int, ...] = (256, 256)
    eval_interval: int = 1000
    checkpoint_interval: int = 50_000
    checkpoint_dir: str = "checkpoints"
    seed: int = 0
    gamma: float = 0.99
    warmup_steps: int = 1000
    update_every: int = 1
    torch_threads: int = 1  # tiny tensors: single-thread avoids dispatch overhead

    def __post_init__(self):
        if not self.endpoint:
            raise ValueError("endpoint is required")
        for key in ("learning_rate", "batch_size", "soft_update_tau",
                    "total_iterations", "replay_capacity", "eval_interval",
                    "checkpoint_interval", "update_every"):
            if getattr(self, key) <= 0:
                raise ValueError(f"{key} must be positive")
        if self.entropy_coefficient_mode not in ("auto", "fixed"):
            raise ValueError("entropy_coefficient_mode must be 'auto' or 'fixed'")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        self.network_widths = tuple(int(w) for w in self.network_widths)


def load_trainer_config(text: str) -> TrainerConfig:
    doc = tomllib.loads(text)
    return TrainerConfig(**doc)


def load_trainer_config_path(path) -> TrainerConfig:
    with open(path, encoding="utf-8") as handle:
        return load_trainer_config(handle.read())
