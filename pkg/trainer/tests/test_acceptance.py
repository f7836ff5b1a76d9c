"""Trainer acceptance: masking contract, smoke learning, eval pipeline.

The smoke-learning test is the heavy one (three 50k-iteration runs at the
reference learning rate and soft-update coefficient); expect several
minutes of wall time.
"""
import csv

import numpy as np

from msac.client import EnvClient
from msac.config import TrainerConfig
from msac.evaluate import evaluate, runner_command
from msac.trainer import MaskedSacTrainer

from conftest import SMOKE_SCENARIO, runner_base, serve_endpoint

EPISODE_LEN = 500  # smoke_scenario.toml


def smoke_cfg(tmp_path, seed, iterations) -> TrainerConfig:
    return TrainerConfig(
        endpoint=serve_endpoint(),
        learning_rate=1e-5,        # reference value, pinned by the smoke criterion
        soft_update_tau=1e-5,      # reference value, pinned by the smoke criterion
        entropy_coefficient_mode="auto",
        batch_size=128,
        network_widths=(64, 64),
        total_iterations=iterations,
        replay_capacity=100_000,
        eval_interval=1000,
        checkpoint_interval=10_000_000,
        checkpoint_dir=str(tmp_path / f"ckpt_{seed}"),
        seed=seed,
        warmup_steps=1000,
        update_every=1,
    )


def random_policy_window(base_seed: int, episodes) -> float:
    """Mean reward of the uniform-random policy over the given episode
    indices of the shared seed schedule (env seed = base_seed + episode)."""
    rng = np.random.default_rng(base_seed + 7777)
    rewards = []
    with EnvClient(serve_endpoint()) as client:
        client.hello()
        for ep in episodes:
            client.reset(base_seed + ep)
            for _ in range(EPISODE_LEN):
                reply = client.step(
                    rng.uniform(0.0, 1.0, (client.n_max, client.n_orus)))
                rewards.append(reply["reward"])
    return float(np.mean(rewards))


def test_c11_masking_contract(tmp_path):
    """1000-step training slice: every transmitted action has exactly-zero
    inactive rows, and the replay audit finds zero violations."""
    cfg = smoke_cfg(tmp_path, seed=11, iterations=1000)
    trainer = MaskedSacTrainer(cfg, record_transmissions=True)
    trainer.train()
    trainer.client.close()

    assert len(trainer.transmit_log) == 1000
    masks = trainer.replay.mask[: trainer.replay.size]
    assert (masks < 0.5).any(), "no inactive rows occurred; contract untested"
    for sent, mask in zip(trainer.transmit_log, masks):
        assert np.all(sent[mask < 0.5] == 0.0)
    assert trainer.replay.audit_masking(trainer.n_orus) == 0


def test_c12_smoke_learning_beats_random(tmp_path):
    """2 users, 4 ORUs, 5e4 iterations at the reference lr and tau: the
    final-1000-step mean reward strictly exceeds the uniform-random
    policy's mean on the same episode seeds, for three shared seeds."""
    iterations = 50_000
    final_episodes = (iterations // EPISODE_LEN - 2,
                      iterations // EPISODE_LEN - 1)
    for base_seed in (1, 2, 3):
        trainer = MaskedSacTrainer(smoke_cfg(tmp_path, base_seed, iterations))
        trainer.train()
        trained = float(np.mean([row[0] for row in trainer._window]))
        trainer.client.close()
        random_mean = random_policy_window(base_seed, final_episodes)
        assert trained > random_mean, (
            f"seed {base_seed}: trained {trained:.4f} <= random {random_mean:.4f}")


def test_c13_eval_pipeline_emits_csv_bundle(tmp_path):
    """A checkpoint evaluated through the metrics runner in external mode
    for 1e4 steps produces the full CSV bundle with valid schemas."""
    cfg = smoke_cfg(tmp_path, seed=13, iterations=1500)
    trainer = MaskedSacTrainer(cfg)
    result = trainer.train()
    trainer.client.close()

    out = tmp_path / "eval"
    steps = 10_000
    summary = evaluate(result["checkpoint"], SMOKE_SCENARIO, steps, 99, out,
                       runner_cmd=runner_command(SMOKE_SCENARIO, out, steps, 99,
                                                 base=runner_base()))
    assert summary["steps"] == steps

    rows = {name: list(csv.reader(open(out / name)))
            for name in ("outage_cdf.csv", "power_cdf.csv",
                         "cluster_size_pdf.csv", "reconfig_rate.csv",
                         "summary.csv")}
    assert rows["outage_cdf.csv"][0] == ["log10_eps", "cdf_inside", "cdf_outside"]
    assert rows["power_cdf.csv"][0] == ["power_fraction", "cdf"]
    assert rows["cluster_size_pdf.csv"][0] == ["size", "pdf"]
    assert rows["reconfig_rate.csv"][0] == ["step", "reconfig_fraction"]
    assert rows["summary.csv"][0] == ["key", "value"]

    pdf = [float(r[1]) for r in rows["cluster_size_pdf.csv"][1:]]
    assert abs(sum(pdf) - 1.0) <= 1e-12
    assert len(rows["reconfig_rate.csv"]) == steps + 1
    summary_map = dict(rows["summary.csv"][1:])
    assert int(summary_map["steps"]) == steps
