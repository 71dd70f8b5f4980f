"""Per-user analysis fan-out shared by the CLI and the synthetic sweep."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Hashable, Iterable, Sequence

from mobacc.entropy import EntropyProfile, profile_sequence
from mobacc.ingest import Trajectory
from mobacc.markov import PredictionResult, evaluate_prequential_sequence, evaluate_split_sequence


def analyze_sequence(
    user_id: str,
    locations: Sequence[Hashable],
    order: int = 2,
    *,
    backoff: bool = True,
    train_fraction: float | None = None,
) -> tuple[EntropyProfile, PredictionResult]:
    """Entropy profile plus predictor score for one user's location sequence."""
    profile = profile_sequence(user_id, locations)
    if train_fraction is None:
        prediction = evaluate_prequential_sequence(user_id, locations, order, backoff=backoff)
    else:
        prediction = evaluate_split_sequence(
            user_id, locations, order, train_fraction=train_fraction, backoff=backoff
        )
    return profile, prediction


def analyze_trajectory(
    traj: Trajectory,
    order: int = 2,
    *,
    backoff: bool = True,
    train_fraction: float | None = None,
) -> tuple[EntropyProfile, PredictionResult]:
    return analyze_sequence(
        traj.user_id, traj.locations, order, backoff=backoff, train_fraction=train_fraction
    )


def _try_worker(args):
    user_id, locations, order, backoff, train_fraction = args
    try:
        return analyze_sequence(user_id, locations, order, backoff=backoff, train_fraction=train_fraction), None
    except ValueError as exc:
        return None, str(exc)


def analyze_trajectories(
    trajectories: Sequence[Trajectory],
    order: int = 2,
    *,
    backoff: bool = True,
    train_fraction: float | None = None,
    threads: int = 1,
    skip_bad_users: bool = False,
) -> tuple[list[tuple[EntropyProfile, PredictionResult]], list[tuple[str, str]]]:
    """Analyze users independently, optionally across worker processes.

    Returns (pairs in input order, skipped (user_id, reason) list). Without
    ``skip_bad_users`` the first per-user error propagates.
    """
    results: list[tuple[EntropyProfile, PredictionResult]] = []
    skipped: list[tuple[str, str]] = []

    def handle(user_id: str, outcome, err_text: str | None):
        if err_text is None:
            results.append(outcome)
        elif skip_bad_users:
            skipped.append((user_id, err_text))
        else:
            raise ValueError(f"user {user_id}: {err_text}")

    jobs = [(t.user_id, t.locations, order, backoff, train_fraction) for t in trajectories]
    if threads <= 1 or len(jobs) < 2:
        for job in jobs:
            outcome, err_text = _try_worker(job)
            handle(job[0], outcome, err_text)
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunk = max(1, len(jobs) // (threads * 8))
            for job, (outcome, err_text) in zip(jobs, pool.map(_try_worker, jobs, chunksize=chunk)):
                handle(job[0], outcome, err_text)
    return results, skipped


def join_by_user(
    profiles: Iterable[EntropyProfile],
    predictions: Iterable[PredictionResult],
) -> list[tuple[EntropyProfile, PredictionResult]]:
    """Pair entropy profiles with prediction results on user_id."""
    by_user = {p.user_id: p for p in predictions}
    pairs = []
    for profile in profiles:
        prediction = by_user.get(profile.user_id)
        if prediction is None:
            raise ValueError(f"no prediction result for user {profile.user_id!r}")
        pairs.append((profile, prediction))
    return pairs
