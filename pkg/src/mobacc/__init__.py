"""Mobility entropy vs. prediction accuracy modelling toolkit.

Pipeline: ingest location logs into per-user trajectories, measure each
user's mobility entropy, score a k-order Markov next-place predictor,
bin users by entropy, and fit a Gaussian density of accuracy whose mean
and spread are smooth functions of the entropy level.
"""

from mobacc.ingest import CdrRecord, FieldLayout, Trajectory, build_trajectories, filter_active, parse_records
from mobacc.entropy import EntropyProfile, entropy_profile, random_entropy, real_entropy_lz, real_entropy_oracle, uncorrelated_entropy
from mobacc.markov import PredictionResult, TransitionModel, evaluate_prequential
from mobacc.intervals import EntropyBinning, IntervalFit, bin_users, fit_interval_gaussian, kde, ks_test, mse
from mobacc.fitting import (
    DoubleGaussianCurveFit,
    GaussianCurveFit,
    LinearFit,
    PolynomialFit,
    lm_double_gaussian,
    lm_gaussian,
    lm_gaussian_pdf,
    ols_linear,
    ols_polynomial,
    select_sigma_model,
)
from mobacc.model import GaussianAccuracyModel, ModelDocumentError, OutOfDomainError
from mobacc.synth import GeneratorConfig, entropy_accuracy_sweep, generate

__version__ = "0.1.0"

__all__ = [
    "CdrRecord",
    "DoubleGaussianCurveFit",
    "EntropyBinning",
    "EntropyProfile",
    "FieldLayout",
    "GaussianAccuracyModel",
    "GaussianCurveFit",
    "GeneratorConfig",
    "IntervalFit",
    "LinearFit",
    "ModelDocumentError",
    "OutOfDomainError",
    "PolynomialFit",
    "PredictionResult",
    "Trajectory",
    "TransitionModel",
    "bin_users",
    "build_trajectories",
    "entropy_accuracy_sweep",
    "entropy_profile",
    "evaluate_prequential",
    "filter_active",
    "fit_interval_gaussian",
    "generate",
    "kde",
    "ks_test",
    "lm_double_gaussian",
    "lm_gaussian",
    "lm_gaussian_pdf",
    "mse",
    "ols_linear",
    "ols_polynomial",
    "parse_records",
    "random_entropy",
    "real_entropy_lz",
    "real_entropy_oracle",
    "select_sigma_model",
    "uncorrelated_entropy",
]
