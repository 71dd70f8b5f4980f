import json
import math

import numpy as np
import pytest

from mobacc.fitting import GaussianCurveFit, LinearFit
from mobacc.model import (
    GaussianAccuracyModel,
    ModelDocumentError,
    OutOfDomainError,
    adaptive_simpson,
)

MU_COEFFS = (-0.1726, 0.9845)
SIGMA_COEFFS = (0.09415, 2.548, 1.96)


@pytest.fixture
def model():
    return GaussianAccuracyModel(
        mu_fit=LinearFit(*MU_COEFFS, residual_mse=0.0),
        sigma_fit=GaussianCurveFit(*SIGMA_COEFFS, residual_mse=0.0),
    )


def test_domain_is_the_84_interval_labels(model):
    domain = model.domain()
    assert len(domain) == 84
    assert domain[0] == 0.05 and domain[-1] == 4.2
    assert all(model.contains(s) for s in domain)
    assert not model.contains(2.54)
    assert not model.contains(4.25)


def test_mu_hand_values(model):
    assert model.mu_of(2.55) == pytest.approx(-0.1726 * 2.55 + 0.9845, abs=1e-15)
    assert model.mu_of(2.55) == pytest.approx(0.54437, abs=1e-6)
    assert model.mu_of(0.05) == pytest.approx(0.97587, abs=1e-6)


def test_mu_constant_when_slope_zero():
    flat = GaussianAccuracyModel(LinearFit(0.0, 0.7, 0.0), GaussianCurveFit(*SIGMA_COEFFS, 0.0))
    assert {flat.mu_of(s) for s in flat.domain()} == {0.7}


def test_mu_affine_identity(model):
    domain = model.domain()
    for s1, s2 in [(0.05, 4.15), (1.0, 3.0), (0.6, 2.8)]:
        mid = round((s1 + s2) / 2, 10)
        assert mid in domain
        assert model.mu_of(s1) + model.mu_of(s2) == pytest.approx(2 * model.mu_of(mid), abs=1e-12)


def test_mu_strictly_decreasing(model):
    values = [model.mu_of(s) for s in model.domain()]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_sigma_hand_values(model):
    expected = 0.09415 * math.exp(-(((2.55 - 2.548) / 1.96) ** 2))
    assert model.sigma_of(2.55) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.09415, abs=1e-6)
    # at center +- width the bump sits at amplitude / e
    off = GaussianAccuracyModel(
        LinearFit(*MU_COEFFS, 0.0), GaussianCurveFit(0.08, 2.0, 0.5, 0.0)
    )
    assert off.sigma_of(2.5) == pytest.approx(0.08 / math.e, abs=1e-12)
    assert off.sigma_of(1.5) == pytest.approx(0.08 / math.e, abs=1e-12)


def test_construction_rejects_non_positive_sigma():
    with pytest.raises(ValueError, match="sigma"):
        GaussianAccuracyModel(LinearFit(*MU_COEFFS, 0.0), GaussianCurveFit(0.0, 2.5, 1.9, 0.0))


def test_pdf_hand_value(model):
    assert model.pdf(0.54437, 2.55) == pytest.approx(4.2372, abs=1e-3)


def test_pdf_peak_identity_on_every_label(model):
    for s in model.domain():
        mu, sigma = model.mu_of(s), model.sigma_of(s)
        assert model.pdf(mu, s) == pytest.approx(1 / (math.sqrt(2 * math.pi) * sigma), abs=1e-9)
        expected = model.pdf(mu, s) * math.exp(-0.5)
        assert model.pdf(mu + sigma, s) == pytest.approx(expected, abs=1e-12)
        assert model.pdf(mu - sigma, s) == pytest.approx(expected, abs=1e-12)


def test_pdf_normalization_untruncated(model):
    s = 2.55
    mu, sigma = model.mu_of(s), model.sigma_of(s)
    total = adaptive_simpson(lambda x: model.pdf(x, s), mu - 10 * sigma, mu + 10 * sigma, 1e-10)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_cdf_consistency_at_the_mean(model):
    s = 1.05
    mu, sigma = model.mu_of(s), model.sigma_of(s)
    half = adaptive_simpson(lambda x: model.pdf(x, s), mu - 10 * sigma, mu, 1e-10)
    assert half == pytest.approx(0.5, abs=1e-6)


def test_one_sigma_mass(model):
    s = 2.55
    mu, sigma = model.mu_of(s), model.sigma_of(s)
    mass = model.interval_probability(s, mu - sigma, mu + sigma)
    assert mass == pytest.approx(0.6827, abs=1e-4)


def test_truncated_renormalizes(model):
    truncated = model.with_truncation(True)
    assert truncated.interval_probability(2.55, 0.0, 1.0) == pytest.approx(1.0, abs=1e-6)
    assert truncated.pdf(0.5, 2.55) >= model.pdf(0.5, 2.55)
    with pytest.raises(ValueError, match="outside"):
        truncated.pdf(1.5, 2.55)


def test_narrow_density_mass_not_lost(model):
    # bulk far from the range midpoints must still be caught by quadrature
    mass = model.interval_probability(0.05, 0.0, 1.0)
    mu, sigma = model.mu_of(0.05), model.sigma_of(0.05)
    from statistics import NormalDist

    expected = NormalDist(mu, sigma).cdf(1.0) - NormalDist(mu, sigma).cdf(0.0)
    assert mass == pytest.approx(expected, abs=1e-9)


def test_out_of_domain_errors(model):
    with pytest.raises(OutOfDomainError):
        model.mu_of(2.54)
    with pytest.raises(OutOfDomainError):
        model.pdf(0.5, 9.0)
    assert model.mu_of(2.54, extrapolate=True) == pytest.approx(-0.1726 * 2.54 + 0.9845)


def test_sampling_statistics(model):
    draws = model.sample(2.55, 100_000, seed=123)
    assert abs(float(draws.mean()) - 0.54437) < 0.002
    again = model.sample(2.55, 100_000, seed=123)
    assert np.array_equal(draws, again)
    assert not np.array_equal(draws, model.sample(2.55, 100_000, seed=124))


def test_truncated_sampling_stays_in_range(model):
    # push the mean outside [0,1] so rejection has real work to do
    shifted = GaussianAccuracyModel(
        LinearFit(0.0, 1.02, 0.0), GaussianCurveFit(0.05, 2.0, 2.0, 0.0), truncated=True
    )
    draws = shifted.sample(2.0, 20_000, seed=5)
    assert draws.min() >= 0.0 and draws.max() <= 1.0


def test_serialize_round_trip(model):
    text = model.to_json()
    back = GaussianAccuracyModel.from_json(text)
    assert back.mu_fit.a == model.mu_fit.a
    assert back.mu_fit.b == model.mu_fit.b
    assert back.sigma_fit.params == model.sigma_fit.params
    assert back.interval_width == model.interval_width
    assert back.n_intervals == model.n_intervals
    assert back.truncated == model.truncated
    assert back.to_json() == text


def test_document_round_trips_printed_coefficients(model):
    document = json.loads(model.to_json())
    assert document["mu"]["a"] == -0.1726
    assert document["mu"]["b"] == 0.9845
    assert document["sigma"]["A"] == 0.09415
    assert document["sigma"]["m"] == 2.548
    assert document["sigma"]["w"] == 1.96


def test_missing_field_named_in_error(model):
    document = json.loads(model.to_json())
    del document["sigma"]["w"]
    with pytest.raises(ModelDocumentError, match=r"sigma_fit\.w"):
        GaussianAccuracyModel.from_document(document)
    with pytest.raises(ModelDocumentError):
        GaussianAccuracyModel.from_json("{not json")
    with pytest.raises(ModelDocumentError):
        GaussianAccuracyModel.from_json("[]")


def test_adaptive_simpson_known_integrals():
    assert adaptive_simpson(math.sin, 0.0, math.pi, 1e-10) == pytest.approx(2.0, abs=1e-9)
    assert adaptive_simpson(lambda x: x * x, 0.0, 1.0, 1e-12) == pytest.approx(1 / 3, abs=1e-12)
    assert adaptive_simpson(math.exp, 1.0, 1.0, 1e-9) == 0.0
