"""Deterministic random streams shared by all simulator modules.

Every stochastic component (mobility, LOS redraws, arrivals, observation
noise, Monte-Carlo oracles) owns its own named sub-stream, so adding or
removing draws in one component never shifts the sequence seen by another.
Streams are built on the counter-based Philox generator, which produces
identical sequences on every platform for a given (seed, stream) pair.
"""
from __future__ import annotations

import numpy as np

# Fixed stream ids; never renumber, or saved seeds stop reproducing.
STREAM_IDS = {
    "reset": 0,
    "mobility": 1,
    "los": 2,
    "arrivals": 3,
    "obs_noise": 4,
    "fading_oracle": 5,
}


class RandomSource:
    """A single-owner random stream identified by (seed, stream[, entity]).

    `stream` may be a name from STREAM_IDS or a raw integer. `entity`
    separates per-object sub-streams (e.g. one per UAV slot) so objects can
    be stepped in any order without changing their draws.
    """

    def __init__(self, seed: int, stream: int | str = 0, entity: int | None = None):
        if isinstance(stream, str):
            stream = STREAM_IDS[stream]
        self.seed = int(seed)
        self.stream = int(stream)
        self.entity = entity
        key = (self.stream,) if entity is None else (self.stream, int(entity))
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=key)
        self._gen = np.random.Generator(np.random.Philox(seq))

    def __getattr__(self, name):
        # Delegate draw methods (random, uniform, standard_normal, ...) to the
        # underlying numpy Generator.
        return getattr(self._gen, name)

    def __repr__(self):
        return f"RandomSource(seed={self.seed}, stream={self.stream}, entity={self.entity})"
