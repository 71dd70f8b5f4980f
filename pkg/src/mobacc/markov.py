"""k-order Markov next-place prediction with prequential scoring.

The model keeps raw transition counts for its own order plus a chain of
lower-order views down to order 0 (global symbol frequencies). Prediction
takes the count-argmax for the exact context, breaking ties toward the
smallest location id; an unseen context backs off to the (k-1)-suffix
context, recursively, and only a model with zero observations declines
to predict.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

from mobacc.ingest import Trajectory

Context = tuple


@dataclass(frozen=True)
class PredictionResult:
    """Per-user prequential score: hit fraction over all prediction steps."""

    user_id: str
    order: int
    attempts: int
    hits: int
    accuracy: float


class TransitionModel:
    """Counting model of (k previous locations) -> next location."""

    __slots__ = ("order", "counts", "total_observations", "_best", "_sub")

    def __init__(self, order: int = 2):
        if order < 0:
            raise ValueError("order must be >= 0")
        self.order = order
        self.counts: dict[Context, dict[Hashable, int]] = {}
        self.total_observations = 0
        # running (count, symbol) argmax per context; ties keep smaller symbol
        self._best: dict[Context, tuple[int, Hashable]] = {}
        self._sub = TransitionModel(order - 1) if order > 0 else None

    def observe(self, context: Sequence[Hashable], next_location: Hashable) -> None:
        """Count one (context -> next) transition, in this order and all
        lower-order suffix views."""
        if len(context) != self.order:
            raise ValueError(f"context length {len(context)} != model order {self.order}")
        self._observe(tuple(context), next_location)

    def _observe(self, context: Context, next_location: Hashable) -> None:
        bucket = self.counts.setdefault(context, {})
        count = bucket.get(next_location, 0) + 1
        bucket[next_location] = count
        self.total_observations += 1
        best = self._best.get(context)
        if best is None or count > best[0] or (count == best[0] and next_location < best[1]):
            self._best[context] = (count, next_location)
        if self._sub is not None:
            self._sub._observe(context[1:], next_location)

    def observe_partial(self, context: Sequence[Hashable], next_location: Hashable) -> None:
        """Feed a transition whose context is shorter than the model order
        into the lower-order views it fits (warm-up positions)."""
        if len(context) >= self.order:
            raise ValueError("partial context must be shorter than the model order")
        model = self
        while model.order > len(context):
            model = model._sub
        model._observe(tuple(context), next_location)

    def predict(self, context: Sequence[Hashable], *, backoff: bool = True) -> Hashable | None:
        """Most-likely next location for the context, or None if unseen
        (backoff disabled) / the model is empty."""
        if len(context) != self.order:
            raise ValueError(f"context length {len(context)} != model order {self.order}")
        context = tuple(context)
        model = self
        while model is not None:
            best = model._best.get(context)
            if best is not None:
                return best[1]
            if not backoff:
                return None
            model = model._sub
            context = context[1:]
        return None


def fit_sequence(seq: Sequence[Hashable], order: int = 2) -> TransitionModel:
    """Build a model from a whole sequence (every position observed once,
    warm-up positions feeding the lower-order views)."""
    model = TransitionModel(order)
    for t in range(min(order, len(seq))):
        model.observe_partial(seq[max(0, t - order) : t], seq[t])
    for t in range(order, len(seq)):
        model.observe(seq[t - order : t], seq[t])
    return model


def evaluate_prequential_sequence(
    user_id: str,
    locations: Sequence[Hashable],
    order: int = 2,
    *,
    backoff: bool = True,
) -> PredictionResult:
    """Predict-then-observe over the whole sequence.

    Position i (i = order .. n-1) is predicted from the model built on
    positions 0..i-1 only, then added to the model; a declined prediction
    counts as a miss. Warm-up positions before the first full context feed
    the lower-order views.
    """
    seq = _as_ints(locations)
    n = len(seq)
    if n < order + 1:
        raise ValueError(f"trajectory length {n} < required minimum {order + 1} for order {order}")
    model = TransitionModel(order)
    for t in range(min(order, n)):
        model.observe_partial(seq[max(0, t - order) : t], seq[t])
    hits = 0
    for t in range(order, n):
        context = seq[t - order : t]
        truth = seq[t]
        if model.predict(context, backoff=backoff) == truth:
            hits += 1
        model.observe(context, truth)
    attempts = n - order
    return PredictionResult(user_id, order, attempts, hits, hits / attempts)


def evaluate_prequential(traj: Trajectory, order: int = 2, *, backoff: bool = True) -> PredictionResult:
    return evaluate_prequential_sequence(traj.user_id, traj.locations, order, backoff=backoff)


def evaluate_split_sequence(
    user_id: str,
    locations: Sequence[Hashable],
    order: int = 2,
    *,
    train_fraction: float = 0.7,
    backoff: bool = True,
) -> PredictionResult:
    """Chronological split: train on the leading fraction, score the frozen
    model on the rest. Sensitivity-check companion to the prequential mode."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    seq = _as_ints(locations)
    n = len(seq)
    split = max(order, int(n * train_fraction))
    if split >= n:
        raise ValueError(f"trajectory length {n} leaves no evaluation tail after split")
    model = fit_sequence(seq[:split], order)
    hits = 0
    for t in range(split, n):
        if model.predict(seq[t - order : t], backoff=backoff) == seq[t]:
            hits += 1
    attempts = n - split
    return PredictionResult(user_id, order, attempts, hits, hits / attempts)


def evaluate_split(
    traj: Trajectory,
    order: int = 2,
    *,
    train_fraction: float = 0.7,
    backoff: bool = True,
) -> PredictionResult:
    return evaluate_split_sequence(
        traj.user_id, traj.locations, order, train_fraction=train_fraction, backoff=backoff
    )


def _as_ints(locations: Sequence[Hashable]) -> tuple[int, ...]:
    # order-preserving relabel to small ints: faster dict keys, same argmax
    # and tie-break outcomes as the original ids
    mapping = {loc: i for i, loc in enumerate(sorted(set(locations)))}
    return tuple(mapping[loc] for loc in locations)
