"""Seeded synthetic trajectory corpora with a tunable regularity knob.

Each user walks a fixed periodic tour over a subset of locations; at every
step, with per-user probability rho, the scheduled stop is replaced by a
uniform draw over all locations. rho = 0 gives a deterministic cycle (zero
entropy rate, near-perfect predictability), rho = 1 an i.i.d. uniform source
(entropy rate log2(L), accuracy 1/L), so the knob sweeps the entropy axis
with analytically known endpoints. Timestamps are hourly, so active-day
counts follow directly from the sequence length.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from mobacc.entropy import EntropyProfile
from mobacc.ingest import Trajectory, make_trajectory
from mobacc.markov import PredictionResult
from mobacc.pipeline import analyze_trajectories

START_EPOCH = 1609718400  # 2021-01-04 00:00:00 UTC, a Monday
HOUR = 3600


@dataclass(frozen=True)
class GeneratorConfig:
    """Corpus shape: users, sequence length, alphabet, noise range, tour."""

    n_users: int = 2000
    seq_length: int = 5000
    n_locations: int = 16
    noise_range: tuple[float, float] = (0.0, 1.0)
    tour_period: int = 8
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.noise_range
        if self.n_users < 1:
            raise ValueError("n_users must be >= 1")
        if self.seq_length < 2:
            raise ValueError("seq_length must be >= 2")
        if self.n_locations < 2:
            raise ValueError("n_locations must be >= 2")
        if not (0.0 <= lo <= hi <= 1.0):
            raise ValueError("noise_range must satisfy 0 <= lo <= hi <= 1")
        if not 1 <= self.tour_period <= self.n_locations:
            raise ValueError("tour_period must be in [1, n_locations]")


@lru_cache(maxsize=8)
def _location_labels(n_locations: int) -> tuple[str, ...]:
    return tuple(f"L{i:03d}" for i in range(n_locations))


def _user_trajectory(config: GeneratorConfig, user_index: int) -> Trajectory:
    rng = np.random.default_rng([config.seed, user_index])
    lo, hi = config.noise_range
    rho = float(rng.uniform(lo, hi))
    tour = rng.permutation(config.n_locations)[: config.tour_period]
    noisy = rng.random(config.seq_length) < rho
    uniform_draws = rng.integers(0, config.n_locations, size=config.seq_length)
    labels = _location_labels(config.n_locations)
    picks = np.where(noisy, uniform_draws, np.resize(tour, config.seq_length))
    events = [
        (float(START_EPOCH + t * HOUR), labels[loc]) for t, loc in enumerate(picks.tolist())
    ]
    return make_trajectory(f"u{user_index:05d}", events)


def generate(config: GeneratorConfig) -> list[Trajectory]:
    """Deterministic corpus for the config; per-user seed substreams."""
    return [_user_trajectory(config, u) for u in range(config.n_users)]


def entropy_accuracy_sweep(
    config: GeneratorConfig,
    *,
    order: int = 2,
    threads: int = 1,
    trajectories: Sequence[Trajectory] | None = None,
) -> list[tuple[EntropyProfile, PredictionResult]]:
    """Generate (or reuse) a corpus and score entropy and accuracy per user."""
    if trajectories is None:
        trajectories = generate(config)
    pairs, _ = analyze_trajectories(trajectories, order, threads=threads)
    return pairs
