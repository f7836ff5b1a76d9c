"""Episode runner and metric pipelines: outage/power CDFs, cluster-size PDF.

CSV files are the evaluation contract; every writer uses 17-significant-
digit decimals so identical runs produce byte-identical files.

Schemas (one header row each):
  outage_cdf.csv       log10_eps,cdf_inside,cdf_outside   (merged support;
                       empty groups emit nan)
  power_cdf.csv        power_fraction,cdf                 (per-step q3)
  cluster_size_pdf.csv size,pdf                           (sizes 0..K)
  reconfig_rate.csv    step,reconfig_fraction             (per-step q1)
  summary.csv          key,value
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from . import baselines, protocol
from .config import ScenarioConfig
from .environment import Environment

EPS_FLOOR = 1e-300  # floor before log10; exact zeros appear after clamping


def _fmt(value) -> str:
    return format(float(value), ".17g")


def empirical_cdf(samples) -> list[tuple[float, float]]:
    """Right-continuous empirical CDF as sorted (value, fraction) pairs."""
    arr = np.asarray(samples, dtype=float)
    if arr.size == 0:
        raise ValueError("empirical_cdf requires at least one sample")
    values, counts = np.unique(arr, return_counts=True)
    fractions = np.cumsum(counts) / arr.size
    return list(zip(values.tolist(), fractions.tolist()))


class RunLog:
    """Append-only record of one run: per-step and per-active-user rows."""

    def __init__(self):
        self.step_rows = []  # (step, q1, q2, q3, reward, n_violations)
        self.user_rows = []  # (step, slot, eps, in_zone, cluster_size, changed)
        self._step = 0

    def record(self, outcome) -> None:
        self.step_rows.append((self._step, outcome.q1, outcome.q2, outcome.q3,
                               outcome.reward, len(outcome.violations)))
        for slot in np.flatnonzero(outcome.active):
            self.user_rows.append((
                self._step, int(slot), float(outcome.eps[slot]),
                bool(outcome.in_zone[slot]), len(outcome.clusters[slot]),
                bool(outcome.changed[slot]),
            ))
        self._step += 1

    @property
    def n_steps(self) -> int:
        return self._step


def write_outputs(log: RunLog, config: ScenarioConfig, out_dir,
                  meta: dict | None = None) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_outage_cdf(log, out / "outage_cdf.csv")
    _write_power_cdf(log, out / "power_cdf.csv")
    _write_cluster_pdf(log, config.n_orus, out / "cluster_size_pdf.csv")
    _write_reconfig(log, out / "reconfig_rate.csv")
    _write_summary(log, out / "summary.csv", meta or {})


def _open_writer(path):
    handle = open(path, "w", newline="")
    return handle, csv.writer(handle, lineterminator="\n")


def _write_outage_cdf(log: RunLog, path) -> None:
    inside = np.sort([np.log10(max(r[2], EPS_FLOOR)) for r in log.user_rows if r[3]])
    outside = np.sort([np.log10(max(r[2], EPS_FLOOR)) for r in log.user_rows if not r[3]])
    support = np.unique(np.concatenate([inside, outside]))
    handle, writer = _open_writer(path)
    with handle:
        writer.writerow(["log10_eps", "cdf_inside", "cdf_outside"])
        for value in support:
            row = [_fmt(value)]
            for group in (inside, outside):
                if group.size:
                    row.append(_fmt(np.searchsorted(group, value, side="right") / group.size))
                else:
                    row.append("nan")
            writer.writerow(row)


def _write_power_cdf(log: RunLog, path) -> None:
    handle, writer = _open_writer(path)
    with handle:
        writer.writerow(["power_fraction", "cdf"])
        if log.step_rows:
            for value, frac in empirical_cdf([r[3] for r in log.step_rows]):
                writer.writerow([_fmt(value), _fmt(frac)])


def _write_cluster_pdf(log: RunLog, n_orus: int, path) -> None:
    sizes = np.array([r[4] for r in log.user_rows], dtype=int)
    handle, writer = _open_writer(path)
    with handle:
        writer.writerow(["size", "pdf"])
        for size in range(n_orus + 1):
            mass = np.count_nonzero(sizes == size) / sizes.size if sizes.size else 0.0
            writer.writerow([size, _fmt(mass)])


def _write_reconfig(log: RunLog, path) -> None:
    handle, writer = _open_writer(path)
    with handle:
        writer.writerow(["step", "reconfig_fraction"])
        for row in log.step_rows:
            writer.writerow([row[0], _fmt(row[1])])


def _write_summary(log: RunLog, path, meta: dict) -> None:
    steps = np.array(log.step_rows, dtype=float).reshape(-1, 6)
    sizes = [r[4] for r in log.user_rows]
    entries = dict(meta)
    entries.update({
        "steps": log.n_steps,
        "user_steps": len(log.user_rows),
        "mean_reward": steps[:, 4].mean() if len(steps) else 0.0,
        "mean_q1": steps[:, 1].mean() if len(steps) else 0.0,
        "mean_q2": steps[:, 2].mean() if len(steps) else 0.0,
        "mean_q3": steps[:, 3].mean() if len(steps) else 0.0,
        "mean_cluster_size": float(np.mean(sizes)) if sizes else 0.0,
        "unserved_user_steps": int(steps[:, 5].sum()) if len(steps) else 0,
    })
    handle, writer = _open_writer(path)
    with handle:
        writer.writerow(["key", "value"])
        for key, value in entries.items():
            writer.writerow([key, _fmt(value) if isinstance(value, float) else value])


def run_baseline(config: ScenarioConfig, algo: str, steps: int, seed: int,
                 opportunistic: baselines.OpportunisticConfig | None = None) -> RunLog:
    """Drive the environment with a built-in policy for `steps` steps.

    Episodes roll over automatically; episode e reseeds with seed + e.
    """
    opp = opportunistic or baselines.OpportunisticConfig()
    env = Environment(config)
    log = RunLog()
    episode = 0
    env.reset(seed)
    for _ in range(steps):
        if algo == "closest":
            raw = baselines.closest_policy(env.state, config)
        elif algo == "opportunistic":
            raw = baselines.opportunistic_policy(env.state, config, opp)
        else:
            raise ValueError(f"unknown in-process algo '{algo}'")
        _, _, outcome, done = env.step(raw)
        log.record(outcome)
        if done:
            episode += 1
            env.reset(seed + episode)
    return log


def run(config: ScenarioConfig, algo: str, steps: int, seed: int, out_dir,
        opportunistic: baselines.OpportunisticConfig | None = None,
        transport=None) -> RunLog:
    """Execute a run and write the CSV bundle to out_dir.

    `algo` is closest, opportunistic, or external. External runs serve a
    protocol session over `transport` (a (reader, writer) pair; stdio when
    None) and log whatever the connected agent drives; the agent controls
    episode seeds and run length.
    """
    if algo in ("closest", "opportunistic"):
        log = run_baseline(config, algo, steps, seed, opportunistic)
    elif algo == "external":
        log = RunLog()
        if transport is None:
            protocol.serve_stdio(config, observer=log.record)
        else:
            reader, writer = transport
            protocol.serve_streams(config, reader, writer, observer=log.record)
    else:
        raise ValueError(f"unknown algo '{algo}'")
    write_outputs(log, config, out_dir, meta={"algo": algo, "seed": seed})
    return log
