"""Gaussian model of prediction accuracy conditioned on entropy level.

``p(x | s)`` is a normal density in the accuracy ``x`` whose mean is affine
in the entropy label ``s`` and whose standard deviation follows a Gaussian
bump in ``s``. The label domain is the discrete interval grid the model was
fitted on; evaluation off the grid requires explicit extrapolation. Accuracy
lives in [0, 1] while the normal has unbounded support: the default follows
the fitted density literally, and a truncated variant renormalizes the mass
to [0, 1].
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from mobacc.fitting import GaussianCurveFit, LinearFit
from mobacc.intervals import DEFAULT_INTERVAL_WIDTH, DEFAULT_N_INTERVALS

DOMAIN_TOLERANCE = 1e-9


class OutOfDomainError(ValueError):
    """Entropy label off the model's discrete grid (and extrapolation off)."""


class ModelDocumentError(ValueError):
    """Malformed or incomplete serialized model document."""


def _normal_cdf(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


@dataclass(frozen=True)
class GaussianAccuracyModel:
    """Fitted accuracy-given-entropy density; immutable, queries are pure."""

    mu_fit: LinearFit
    sigma_fit: GaussianCurveFit
    interval_width: float = DEFAULT_INTERVAL_WIDTH
    n_intervals: int = DEFAULT_N_INTERVALS
    truncated: bool = False
    provenance: dict | None = None

    def __post_init__(self):
        if self.interval_width <= 0 or self.n_intervals < 1:
            raise ValueError("model needs interval_width > 0 and n_intervals >= 1")
        bad = [s for s in self.domain() if self._sigma_at(s) <= 0]
        if bad:
            raise ValueError(f"sigma(s) must be > 0 on the whole domain; non-positive at s={bad[:3]}")

    def domain(self) -> tuple[float, ...]:
        return tuple(round(self.interval_width * (i + 1), 10) for i in range(self.n_intervals))

    def contains(self, s: float) -> bool:
        index = round(s / self.interval_width)
        if not 1 <= index <= self.n_intervals:
            return False
        return abs(s - self.interval_width * index) <= DOMAIN_TOLERANCE

    def _require_domain(self, s: float, extrapolate: bool) -> None:
        if not extrapolate and not self.contains(s):
            raise OutOfDomainError(
                f"s={s!r} is not one of the {self.n_intervals} interval labels "
                f"(width {self.interval_width}); pass extrapolate=True to evaluate anyway"
            )

    def _sigma_at(self, s: float) -> float:
        amplitude, center, width = self.sigma_fit.params
        return amplitude * math.exp(-(((s - center) / width) ** 2))

    def mu_of(self, s: float, *, extrapolate: bool = False) -> float:
        """Mean accuracy at entropy label s."""
        self._require_domain(s, extrapolate)
        return self.mu_fit.a * s + self.mu_fit.b

    def sigma_of(self, s: float, *, extrapolate: bool = False) -> float:
        """Accuracy standard deviation at entropy label s."""
        self._require_domain(s, extrapolate)
        return self._sigma_at(s)

    def pdf(self, x: float, s: float, *, extrapolate: bool = False) -> float:
        """Density of accuracy x at entropy label s.

        The truncated variant renormalizes to [0, 1] and rejects x outside.
        """
        mu = self.mu_of(s, extrapolate=extrapolate)
        sigma = self._sigma_at(s)
        if self.truncated:
            if not 0.0 <= x <= 1.0:
                raise ValueError(f"truncated model: accuracy {x!r} outside [0, 1]")
            mass = _normal_cdf((1.0 - mu) / sigma) - _normal_cdf((0.0 - mu) / sigma)
        else:
            mass = 1.0
        z = (x - mu) / sigma
        return math.exp(-0.5 * z * z) / (math.sqrt(2 * math.pi) * sigma * mass)

    def interval_probability(
        self,
        s: float,
        lo: float,
        hi: float,
        *,
        extrapolate: bool = False,
        tol: float = 1e-9,
    ) -> float:
        """Probability mass of accuracy in [lo, hi] by adaptive quadrature.

        The range is pre-split at mean-centered breakpoints so a density much
        narrower than the range cannot slip between the initial nodes.
        """
        if hi < lo:
            raise ValueError("empty accuracy range")
        self._require_domain(s, extrapolate)
        if self.truncated:
            lo, hi = max(lo, 0.0), min(hi, 1.0)
            if hi <= lo:
                return 0.0
        mu = self.mu_of(s, extrapolate=extrapolate)
        sigma = self._sigma_at(s)
        cuts = sorted({lo, hi, *(min(hi, max(lo, mu + k * sigma)) for k in (-4, -2, -1, 0, 1, 2, 4))})
        f = lambda x: self.pdf(x, s, extrapolate=extrapolate)
        return sum(
            adaptive_simpson(f, a, b, tol / max(1, len(cuts) - 1))
            for a, b in zip(cuts, cuts[1:])
            if b > a
        )

    def sample(self, s: float, count: int, seed: int, *, extrapolate: bool = False) -> np.ndarray:
        """Deterministic draws from the conditional density at label s."""
        mu = self.mu_of(s, extrapolate=extrapolate)
        sigma = self._sigma_at(s)
        rng = np.random.default_rng(seed)
        draws = rng.normal(mu, sigma, size=count)
        if self.truncated:
            bad = (draws < 0.0) | (draws > 1.0)
            while bad.any():
                draws[bad] = rng.normal(mu, sigma, size=int(bad.sum()))
                bad = (draws < 0.0) | (draws > 1.0)
        return draws

    def with_truncation(self, truncated: bool) -> "GaussianAccuracyModel":
        return replace(self, truncated=truncated)

    def to_document(self) -> dict:
        return {
            "mu": {"a": self.mu_fit.a, "b": self.mu_fit.b},
            "sigma": {
                "A": self.sigma_fit.amplitude,
                "m": self.sigma_fit.center,
                "w": self.sigma_fit.width,
            },
            "interval_width": self.interval_width,
            "n_intervals": self.n_intervals,
            "truncated": self.truncated,
            "provenance": dict(self.provenance) if self.provenance else {
                "dataset": None,
                "timestamp": None,
                "tool_version": None,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_document(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_document(cls, document: dict) -> "GaussianAccuracyModel":
        def pull(section: str, key: str, model_field: str, kind: type) -> float:
            block = document.get(section)
            if not isinstance(block, dict) or key not in block:
                raise ModelDocumentError(f"model document missing field {model_field}.{key}")
            value = block[key]
            if not isinstance(value, (int, float)):
                raise ModelDocumentError(f"field {model_field}.{key} must be a number")
            return kind(value)

        for top in ("interval_width", "n_intervals", "truncated"):
            if top not in document:
                raise ModelDocumentError(f"model document missing field {top}")
        mu = LinearFit(a=pull("mu", "a", "mu_fit", float), b=pull("mu", "b", "mu_fit", float), residual_mse=0.0)
        sigma = GaussianCurveFit(
            amplitude=pull("sigma", "A", "sigma_fit", float),
            center=pull("sigma", "m", "sigma_fit", float),
            width=pull("sigma", "w", "sigma_fit", float),
            residual_mse=0.0,
        )
        return cls(
            mu_fit=mu,
            sigma_fit=sigma,
            interval_width=float(document["interval_width"]),
            n_intervals=int(document["n_intervals"]),
            truncated=bool(document["truncated"]),
            provenance=document.get("provenance"),
        )

    @classmethod
    def from_json(cls, text: str) -> "GaussianAccuracyModel":
        try:
            document = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ModelDocumentError(f"invalid model JSON: {exc}") from exc
        if not isinstance(document, dict):
            raise ModelDocumentError("model document must be a JSON object")
        return cls.from_document(document)


def adaptive_simpson(f: Callable[[float], float], a: float, b: float, tol: float = 1e-9) -> float:
    """Adaptive Simpson quadrature with the standard 15x error estimate."""
    if a == b:
        return 0.0

    def simpson(lo: float, hi: float, flo: float, fmid: float, fhi: float) -> float:
        return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)

    def recurse(lo, hi, flo, fmid, fhi, whole, eps, depth):
        mid = 0.5 * (lo + hi)
        lmid = 0.5 * (lo + mid)
        rmid = 0.5 * (mid + hi)
        flm = f(lmid)
        frm = f(rmid)
        left = simpson(lo, mid, flo, flm, fmid)
        right = simpson(mid, hi, fmid, frm, fhi)
        if depth <= 0 or abs(left + right - whole) <= 15.0 * eps:
            return left + right + (left + right - whole) / 15.0
        return recurse(lo, mid, flo, flm, fmid, left, eps / 2.0, depth - 1) + recurse(
            mid, hi, fmid, frm, fhi, right, eps / 2.0, depth - 1
        )

    mid = 0.5 * (a + b)
    fa, fm, fb = f(a), f(mid), f(b)
    whole = simpson(a, b, fa, fm, fb)
    return recurse(a, b, fa, fm, fb, whole, tol, 48)
