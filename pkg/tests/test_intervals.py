import math
from statistics import NormalDist

import numpy as np
import pytest

from mobacc.entropy import EntropyProfile
from mobacc.intervals import (
    DegenerateInterval,
    EntropyBinning,
    bin_users,
    fit_interval_gaussian,
    kde,
    kolmogorov_survival,
    ks_test,
    mse,
    silverman_bandwidth,
    summarize_intervals,
)
from mobacc.markov import PredictionResult


def pair(user, s_real, accuracy):
    profile = EntropyProfile(user, 4.0, 3.0, s_real, 16, 1000)
    return profile, PredictionResult(user, 2, 1000, int(accuracy * 1000), accuracy)


def test_binning_labels_cover_range():
    b = EntropyBinning()
    labels = b.labels()
    assert len(labels) == 84
    assert labels[0] == 0.05
    assert labels[-1] == 4.2
    for i, label in enumerate(labels):
        assert label == round(0.05 * (i + 1), 10)


def test_binning_boundary_membership():
    b = EntropyBinning()
    assert b.label(b.index_of(0.049)) == 0.05
    assert b.label(b.index_of(2.50)) == 2.55
    assert b.label(b.index_of(0.0)) == 0.05
    assert b.label(b.index_of(0.15)) == 0.20
    assert b.index_of(4.2) is None
    assert b.index_of(4.25) is None
    assert b.index_of(-1e-9) is None


def test_partition_property():
    rng = np.random.default_rng(0)
    b = EntropyBinning()
    values = rng.uniform(0, 4.2, 3000)
    values = values[values < 4.2]
    indices = [b.index_of(v) for v in values]
    assert all(i is not None for i in indices)
    for v, i in zip(values, indices):
        lo, hi = 0.05 * i, 0.05 * (i + 1)
        assert lo - 1e-9 <= v < hi + 1e-9


def test_bin_users_spill_and_sizes():
    pairs = [pair("a", 0.049, 0.9), pair("b", 2.50, 0.5), pair("c", 4.25, 0.3), pair("d", -0.1, 0.2)]
    binned = bin_users(pairs)
    assert binned.bins[0.05] == [0.9]
    assert binned.bins[2.55] == [0.5]
    assert binned.spill == 2
    assert sorted(binned.spilled_users) == ["c", "d"]
    total = sum(len(v) for v in binned.bins.values())
    assert total == len(pairs) - binned.spill


def test_bin_users_rejects_mismatched_ids():
    profile, _ = pair("a", 1.0, 0.5)
    _, prediction = pair("b", 1.0, 0.5)
    with pytest.raises(ValueError, match="mismatched"):
        bin_users([(profile, prediction)])


def test_kde_peak_matches_generator():
    rng = np.random.default_rng(7)
    draws = rng.normal(0.5, 0.05, 30000)
    draws = draws[(draws >= 0) & (draws <= 1)][:10000]
    x, density = kde(draws)
    assert len(x) == 256
    assert density.min() >= 0
    peak_height = 1 / (math.sqrt(2 * math.pi) * 0.05)
    assert density.max() == pytest.approx(peak_height, rel=0.05)
    assert x[density.argmax()] == pytest.approx(0.5, abs=0.02)


def test_kde_normalized_on_interior_data():
    rng = np.random.default_rng(8)
    for loc, scale, m in [(0.3, 0.1, 50), (0.6, 0.02, 400), (0.5, 0.2, 1000)]:
        draws = np.clip(rng.normal(loc, scale, m), 0, 1)
        x, density = kde(draws)
        assert np.trapezoid(density, x) == pytest.approx(1.0, abs=0.02)


def test_kde_degenerate_signals():
    with pytest.raises(DegenerateInterval):
        kde([0.5])
    with pytest.raises(DegenerateInterval):
        kde([0.5] * 40)
    # spread far below the grid resolution: density cannot be carried
    rng = np.random.default_rng(9)
    with pytest.raises(DegenerateInterval):
        kde(rng.normal(0.5, 1e-5, 60))


def test_kde_zero_iqr_is_degenerate():
    # >75% identical values: IQR = 0, Silverman bandwidth collapses
    samples = [0.5] * 40 + [0.6] * 2
    assert silverman_bandwidth(np.asarray(samples)) == 0
    with pytest.raises(DegenerateInterval):
        kde(samples)


def test_fit_interval_moments_small_sample():
    mu, sigma, method = fit_interval_gaussian([0.5, 0.7])
    assert mu == pytest.approx(0.6, abs=1e-12)
    assert sigma == pytest.approx(0.141421, abs=1e-6)
    assert method == "moments"


def test_fit_interval_single_sample_floor():
    mu, sigma, method = fit_interval_gaussian([0.8])
    assert (mu, sigma, method) == (0.8, 1e-4, "moments")


def test_fit_interval_kde_path_recovers_generator():
    rng = np.random.default_rng(11)
    draws = rng.normal(0.5, 0.05, 30000)
    draws = draws[(draws >= 0) & (draws <= 1)][:10000]
    mu, sigma, method = fit_interval_gaussian(draws)
    assert method == "kde-least-squares"
    assert mu == pytest.approx(0.5, abs=0.01)
    assert sigma == pytest.approx(0.05, abs=0.01)


def test_fit_interval_empty():
    with pytest.raises(ValueError):
        fit_interval_gaussian([])


def test_ks_single_point():
    result = ks_test([0.0], 0.0, 1.0)
    assert result.statistic == pytest.approx(0.5, abs=1e-15)


def test_ks_plug_in_grid():
    m = 40
    samples = [NormalDist().inv_cdf((i - 0.5) / m) for i in range(1, m + 1)]
    result = ks_test(samples, 0.0, 1.0)
    assert result.statistic == pytest.approx(1 / (2 * m), abs=1e-12)


def test_ks_calibration():
    passes = sum(
        ks_test(np.random.default_rng(seed).normal(0.6, 0.08, 1000), 0.6, 0.08).passed
        for seed in range(50)
    )
    assert passes >= 45


def test_ks_rejects_shifted_distribution():
    rng = np.random.default_rng(3)
    sample = rng.normal(0.5, 0.05, 1000)
    assert not ks_test(sample, 0.8, 0.05).passed


def test_ks_deterministic_and_validated():
    sample = [0.1, 0.5, 0.9]
    assert ks_test(sample, 0.5, 0.2) == ks_test(sample, 0.5, 0.2)
    with pytest.raises(ValueError):
        ks_test(sample, 0.5, 0.0)
    with pytest.raises(ValueError):
        ks_test([], 0.5, 0.2)


def test_kolmogorov_survival_bounds():
    assert kolmogorov_survival(0.0) == 1.0
    assert kolmogorov_survival(0.05) == pytest.approx(1.0, abs=1e-9)
    assert 0.0 < kolmogorov_survival(1.0) < 1.0
    assert kolmogorov_survival(5.0) < 1e-9


def test_mse_examples():
    assert mse([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert mse([0.0, 1.0], [1.0, 1.0]) == pytest.approx(0.5)
    a, b = [0.1, 0.4, 0.9], [0.2, 0.3, 0.5]
    assert mse(a, b) == pytest.approx(mse(list(reversed(a)), list(reversed(b))))
    with pytest.raises(ValueError):
        mse([1.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        mse([], [])


def test_summarize_intervals_covers_all_bins():
    rng = np.random.default_rng(4)
    pairs = []
    for i in range(200):
        s = float(rng.uniform(0, 2))
        acc = float(np.clip(0.9 - 0.3 * s + rng.normal(0, 0.05), 0, 1))
        pairs.append(pair(f"u{i}", s, acc))
    binned = bin_users(pairs)
    rows = summarize_intervals(binned)
    assert len(rows) == 84
    populated = [fit for fit, _ in rows if fit.user_count > 0]
    assert sum(f.user_count for f in populated) == 200
    for fit, ks in rows:
        if fit.user_count == 0:
            assert ks is None
            continue
        assert 0 <= fit.mu <= 1
        assert fit.sigma >= 1e-4 - 1e-15
        if fit.kde_grid is not None:
            xs = np.array([p[0] for p in fit.kde_grid])
            ds = np.array([p[1] for p in fit.kde_grid])
            assert ds.min() >= 0
            assert np.trapezoid(ds, xs) == pytest.approx(1.0, abs=0.02)
