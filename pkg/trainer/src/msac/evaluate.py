"""Deterministic evaluation: drive the metrics runner in external mode.

The runner process (`cfuav run --algo external`) serves the environment on
its stdio, logs every step we drive, and writes the CSV bundle when the
session closes. The policy acts with the squashed distribution mode,
masked exactly as during training.
"""
from __future__ import annotations

import shlex

import numpy as np
import torch

from .client import EnvClient, ProtocolError
from .trainer import load_policy


def runner_command(scenario_path, out_dir, steps: int, seed: int,
                   base: str = "cfuav") -> str:
    return (f"{base} run --algo external --config {shlex.quote(str(scenario_path))} "
            f"--steps {steps} --seed {seed} --out {shlex.quote(str(out_dir))}")


def evaluate(checkpoint_path, scenario_path, steps: int, seed: int, out_dir,
             runner_cmd: str | None = None, policy=None) -> dict:
    if policy is None:
        policy, ckpt = load_policy(checkpoint_path)
    else:
        ckpt = None  # explicit policy object (tests); dimension check skipped
    cmd = runner_cmd or runner_command(scenario_path, out_dir, steps, seed)

    rewards = []
    with EnvClient(cmd) as client:
        hello = client.hello()
        if ckpt is not None and (hello["n_max"], hello["k"]) != (ckpt["n_max"],
                                                                 ckpt["n_orus"]):
            raise ProtocolError(
                f"checkpoint trained for {ckpt['n_max']}x{ckpt['n_orus']}, "
                f"endpoint serves {hello['n_max']}x{hello['k']}")
        episode = 0
        obs = client.reset(seed)
        for _ in range(steps):
            with torch.no_grad():
                flat = policy.mean_action(
                    torch.as_tensor(obs, dtype=torch.float32).unsqueeze(0))
            action = flat.squeeze(0).numpy().astype(np.float64)
            action = action.reshape(client.n_max, client.n_orus)
            action *= client.activity_mask(obs)[:, None]
            reply = client.step(action)
            rewards.append(reply["reward"])
            obs = reply["obs"]
            if reply["done"]:
                episode += 1
                obs = client.reset(seed + episode)
    return {"steps": len(rewards), "episodes": episode,
            "mean_reward": float(np.mean(rewards)) if rewards else 0.0}
