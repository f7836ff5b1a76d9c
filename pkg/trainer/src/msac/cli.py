"""Command-line entry points: msac-train and msac-eval."""
from __future__ import annotations

import argparse
import sys

from .config import load_trainer_config_path
from .evaluate import evaluate
from .trainer import MaskedSacTrainer


def train_main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="msac-train")
    parser.add_argument("--config", required=True, help="trainer TOML file")
    parser.add_argument("--iterations", type=int, default=None,
                        help="override total_iterations")
    args = parser.parse_args(argv)

    cfg = load_trainer_config_path(args.config)
    trainer = MaskedSacTrainer(cfg)
    result = trainer.train(args.iterations)
    print(f"trained {result['iterations']} iterations over "
          f"{result['episodes']} episodes; final checkpoint "
          f"{result['checkpoint']}", file=sys.stderr)
    return 0


def eval_main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="msac-eval")
    parser.add_argument("--checkpoint", required=True)
    parser.add_argument("--scenario", required=True, help="scenario TOML file")
    parser.add_argument("--steps", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", required=True, help="CSV output directory")
    parser.add_argument("--runner-cmd", default=None,
                        help="override the metrics-runner command line")
    args = parser.parse_args(argv)

    result = evaluate(args.checkpoint, args.scenario, args.steps, args.seed,
                      args.out, runner_cmd=args.runner_cmd)
    print(f"evaluated {result['steps']} steps "
          f"(mean reward {result['mean_reward']:.4f}) -> {args.out}",
          file=sys.stderr)
    return 0
