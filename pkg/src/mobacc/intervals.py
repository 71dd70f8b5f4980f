"""Entropy binning, per-interval accuracy densities and diagnostics.

Users are placed into half-open entropy intervals of fixed width, each
labeled by its upper bound. Per interval the accuracy density is estimated
with a Gaussian-kernel KDE (Silverman bandwidth) and summarized by a
Gaussian (mean, standard deviation): a least-squares fit to the KDE grid
when the interval is well populated, sample moments otherwise. A one-sample
Kolmogorov-Smirnov test checks the summarized Gaussian against the raw
accuracies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from mobacc.entropy import EntropyProfile
from mobacc.fitting import lm_gaussian_pdf
from mobacc.markov import PredictionResult

DEFAULT_INTERVAL_WIDTH = 0.05
DEFAULT_N_INTERVALS = 84
DEFAULT_KDE_GRID_SIZE = 256
KDE_FIT_MIN_USERS = 30
SIGMA_FLOOR = 1e-4

FIT_METHOD_KDE = "kde-least-squares"
FIT_METHOD_MOMENTS = "moments"


class DegenerateInterval(ValueError):
    """Too few samples or no spread: KDE not defined, fall back to moments."""


@dataclass(frozen=True)
class EntropyBinning:
    """Half-open intervals [width*(n-1), width*n), labeled by width*n."""

    width: float = DEFAULT_INTERVAL_WIDTH
    n_intervals: int = DEFAULT_N_INTERVALS

    def __post_init__(self):
        if self.width <= 0 or self.n_intervals < 1:
            raise ValueError("binning needs width > 0 and n_intervals >= 1")

    @property
    def upper_bound(self) -> float:
        return self.width * self.n_intervals

    def labels(self) -> list[float]:
        return [self.label(i) for i in range(self.n_intervals)]

    def label(self, index: int) -> float:
        if not 0 <= index < self.n_intervals:
            raise IndexError(index)
        return round(self.width * (index + 1), 10)

    def index_of(self, value: float) -> int | None:
        """Index of the interval containing ``value``; None if outside
        [0, width * n_intervals)."""
        if value < 0:
            return None
        # round before flooring so decimal boundaries land left-closed
        index = math.floor(round(value / self.width, 9))
        if index >= self.n_intervals:
            return None
        return index


@dataclass(frozen=True)
class IntervalFit:
    """Gaussian summary of one interval's accuracy distribution."""

    s: float
    user_count: int
    mu: float
    sigma: float
    fit_method: str
    kde_grid: tuple[tuple[float, float], ...] | None = None


@dataclass(frozen=True)
class KsResult:
    statistic: float
    p_value: float
    passed: bool


@dataclass
class BinnedAccuracies:
    """Accuracy lists keyed by interval label, plus out-of-range spill."""

    binning: EntropyBinning
    bins: dict[float, list[float]] = field(default_factory=dict)
    spilled_users: list[str] = field(default_factory=list)

    @property
    def spill(self) -> int:
        return len(self.spilled_users)

    def populated(self, min_users: int = 1) -> dict[float, list[float]]:
        return {s: acc for s, acc in self.bins.items() if len(acc) >= min_users}


def bin_users(
    profiles: Iterable[tuple[EntropyProfile, PredictionResult]],
    binning: EntropyBinning | None = None,
) -> BinnedAccuracies:
    """Place each user's accuracy into the interval holding its real entropy.

    Values outside [0, upper bound) are excluded and recorded as spill.
    """
    binning = binning or EntropyBinning()
    out = BinnedAccuracies(binning=binning)
    for profile, prediction in profiles:
        if profile.user_id != prediction.user_id:
            raise ValueError(f"mismatched pair: {profile.user_id!r} vs {prediction.user_id!r}")
        index = binning.index_of(profile.s_real)
        if index is None:
            out.spilled_users.append(profile.user_id)
            continue
        out.bins.setdefault(binning.label(index), []).append(prediction.accuracy)
    return out


def silverman_bandwidth(samples: np.ndarray) -> float:
    sd = float(np.std(samples, ddof=1))
    q75, q25 = np.percentile(samples, [75, 25])
    return 0.9 * min(sd, (q75 - q25) / 1.34) * len(samples) ** (-0.2)


NORMALIZATION_TOLERANCE = 0.02


def kde(
    accuracies: Sequence[float],
    grid_size: int = DEFAULT_KDE_GRID_SIZE,
) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian-kernel density on an even grid over [0, 1].

    Bandwidth is Silverman's rule 0.9 * min(sd, IQR/1.34) * m**(-1/5).
    Raises DegenerateInterval for < 2 samples, no usable spread, or when the
    grid cannot carry the density: the trapezoid integral over [0, 1] must
    come out 1 within NORMALIZATION_TOLERANCE, which fails when the
    bandwidth drops below the grid spacing (spiky, under-resolved density)
    or the samples sit hard against a boundary (mass leaks outside [0, 1]).
    Degenerate intervals fall back to moment summaries.
    """
    samples = np.asarray(accuracies, dtype=float)
    if len(samples) < 2:
        raise DegenerateInterval("KDE needs >= 2 samples")
    if float(np.var(samples)) == 0.0:
        raise DegenerateInterval("KDE needs nonzero variance")
    bandwidth = silverman_bandwidth(samples)
    if bandwidth <= 0:
        raise DegenerateInterval("zero Silverman bandwidth (degenerate interquartile range)")
    x = np.linspace(0.0, 1.0, grid_size)
    z = (x[:, None] - samples[None, :]) / bandwidth
    density = np.exp(-0.5 * z**2).sum(axis=1) / (len(samples) * bandwidth * math.sqrt(2 * math.pi))
    integral = float(np.trapezoid(density, x))
    if abs(integral - 1.0) > NORMALIZATION_TOLERANCE:
        raise DegenerateInterval(
            f"KDE grid integrates to {integral:.4f}: bandwidth {bandwidth:.2e} is not "
            f"resolvable on a {grid_size}-point grid over [0, 1]"
        )
    return x, density


def fit_interval_gaussian(
    accuracies: Sequence[float],
    kde_grid: tuple[np.ndarray, np.ndarray] | None = None,
    *,
    kde_min_users: int = KDE_FIT_MIN_USERS,
) -> tuple[float, float, str]:
    """(mu, sigma, method) for one interval.

    Populated intervals (>= ``kde_min_users``) least-squares fit the
    normalized Gaussian pdf to the KDE grid, moment-initialized; smaller or
    degenerate ones use sample moments with a floor on sigma.
    """
    samples = np.asarray(accuracies, dtype=float)
    if len(samples) == 0:
        raise ValueError("empty interval")
    mean = float(samples.mean())
    sd = float(np.std(samples, ddof=1)) if len(samples) > 1 else 0.0
    if len(samples) >= kde_min_users:
        try:
            if kde_grid is None:
                kde_grid = kde(samples)
            x, density = kde_grid
            fit = lm_gaussian_pdf(np.column_stack((x, density)), init=(mean, max(sd, SIGMA_FLOOR)))
            return fit.mu, fit.sigma, FIT_METHOD_KDE
        except DegenerateInterval:
            pass
    return mean, max(sd, SIGMA_FLOOR), FIT_METHOD_MOMENTS


def _normal_cdf(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def kolmogorov_survival(lam: float, term_tol: float = 1e-10) -> float:
    """P(K > lam) for the Kolmogorov distribution, by the alternating series
    2 * sum_j (-1)^(j-1) exp(-2 j^2 lam^2), truncated below ``term_tol``."""
    if lam <= 0:
        return 1.0
    total = 0.0
    sign = 1.0
    j = 1
    while True:
        term = math.exp(-2.0 * j * j * lam * lam)
        total += sign * term
        if term < term_tol or j > 100000:
            break
        sign = -sign
        j += 1
    return min(1.0, max(0.0, 2.0 * total))


def ks_test(
    accuracies: Sequence[float],
    mu: float,
    sigma: float,
    alpha: float = 0.05,
) -> KsResult:
    """One-sample Kolmogorov-Smirnov test against Normal(mu, sigma).

    D is the exact sup gap over sample points (both one-sided parts);
    the p-value is the asymptotic Kolmogorov survival at sqrt(m) * D.
    Parameters estimated from the same sample make the pass rate optimistic;
    reported as-is.
    """
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    samples = np.sort(np.asarray(accuracies, dtype=float))
    m = len(samples)
    if m == 0:
        raise ValueError("KS test needs >= 1 sample")
    cdf = np.array([_normal_cdf((x - mu) / sigma) for x in samples])
    upper = np.arange(1, m + 1) / m - cdf
    lower = cdf - np.arange(0, m) / m
    statistic = float(max(upper.max(), lower.max()))
    p_value = kolmogorov_survival(math.sqrt(m) * statistic)
    return KsResult(statistic=statistic, p_value=p_value, passed=p_value > alpha)


def mse(observed: Sequence[float], predicted: Sequence[float]) -> float:
    """Mean squared difference between paired value lists."""
    obs = np.asarray(observed, dtype=float)
    pred = np.asarray(predicted, dtype=float)
    if obs.shape != pred.shape or obs.ndim != 1 or len(obs) == 0:
        raise ValueError("mse needs two equal-length non-empty vectors")
    diff = obs - pred
    return float(diff @ diff / len(obs))


def summarize_intervals(
    binned: BinnedAccuracies,
    *,
    kde_grid_size: int = DEFAULT_KDE_GRID_SIZE,
    kde_min_users: int = KDE_FIT_MIN_USERS,
    alpha: float = 0.05,
    keep_grids: bool = True,
) -> list[tuple[IntervalFit, KsResult | None]]:
    """Fit and test every interval (empty ones included, with zero counts)."""
    out: list[tuple[IntervalFit, KsResult | None]] = []
    for index in range(binned.binning.n_intervals):
        label = binned.binning.label(index)
        accuracies = binned.bins.get(label, [])
        if not accuracies:
            out.append((IntervalFit(label, 0, math.nan, math.nan, FIT_METHOD_MOMENTS), None))
            continue
        grid = None
        try:
            grid = kde(accuracies, grid_size=kde_grid_size)
        except DegenerateInterval:
            grid = None
        mu, sigma, method = fit_interval_gaussian(accuracies, grid, kde_min_users=kde_min_users)
        ks = ks_test(accuracies, mu, sigma, alpha=alpha) if sigma > 0 else None
        stored = tuple(zip(grid[0].tolist(), grid[1].tolist())) if (grid is not None and keep_grids) else None
        out.append((IntervalFit(label, len(accuracies), mu, sigma, method, stored), ks))
    return out
