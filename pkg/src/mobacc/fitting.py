"""Least-squares machinery for the interval-summary curves.

Closed-form ordinary least squares for the linear and quadratic bases, and
a small Levenberg-Marquardt solver (analytic Jacobians, multiplicative
damping) for the Gaussian-bump and two-bump models of the per-interval
standard deviation, plus the two-parameter normalized Gaussian pdf fit used
on KDE grids.

Bump width convention: ``A * exp(-((s - m) / w)**2)`` carries no factor 2
in the exponent denominator, so ``w`` is sqrt(2) times the standard
deviation of the equivalent normal density. The pdf fit uses the genuine
standard-deviation convention. Keep the two apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

LM_DAMPING_INIT = 1e-3
LM_FTOL = 1e-10
LM_XTOL = 1e-12
LM_MAX_ITERATIONS = 200

MODEL_PARAM_COUNTS = {"polynomial": 3, "gaussian": 3, "double_gaussian": 6}
_MODEL_ORDER = ("polynomial", "gaussian", "double_gaussian")


@dataclass(frozen=True)
class LinearFit:
    a: float  # slope
    b: float  # intercept
    residual_mse: float

    @property
    def params(self) -> tuple[float, float]:
        return (self.a, self.b)

    def __call__(self, s):
        return self.a * np.asarray(s) + self.b


@dataclass(frozen=True)
class PolynomialFit:
    coefficients: tuple[float, float, float]  # (c2, c1, c0)
    residual_mse: float

    @property
    def params(self) -> tuple[float, ...]:
        return self.coefficients

    def __call__(self, s):
        c2, c1, c0 = self.coefficients
        s = np.asarray(s)
        return c2 * s**2 + c1 * s + c0


@dataclass(frozen=True)
class GaussianCurveFit:
    amplitude: float
    center: float
    width: float  # stored positive; the model is even in the width
    residual_mse: float
    converged: bool = True
    iterations: int = 0

    @property
    def params(self) -> tuple[float, float, float]:
        return (self.amplitude, self.center, self.width)

    def __call__(self, s):
        return gaussian_bump(np.asarray(s), np.array(self.params))


@dataclass(frozen=True)
class DoubleGaussianCurveFit:
    a1: float
    m1: float
    w1: float
    a2: float
    m2: float
    w2: float
    residual_mse: float
    converged: bool = True
    iterations: int = 0
    collapsed: bool = False  # |m1 - m2| < 1e-6: components degenerate

    @property
    def params(self) -> tuple[float, ...]:
        return (self.a1, self.m1, self.w1, self.a2, self.m2, self.w2)

    def __call__(self, s):
        return double_gaussian_bump(np.asarray(s), np.array(self.params))


@dataclass(frozen=True)
class GaussianPdfFit:
    mu: float
    sigma: float
    residual_mse: float
    converged: bool = True
    iterations: int = 0


def _split_points(points: Sequence[tuple[float, float]]) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("points must be a sequence of (s, y) pairs")
    return arr[:, 0], arr[:, 1]


def ols_linear(points: Sequence[tuple[float, float]]) -> LinearFit:
    """Closed-form OLS line through (s, y) pairs."""
    s, y = _split_points(points)
    if len(s) < 2 or len(set(s.tolist())) < 2:
        raise ValueError("linear fit needs >= 2 points with >= 2 distinct abscissae")
    s_mean, y_mean = s.mean(), y.mean()
    ds = s - s_mean
    a = float(ds @ (y - y_mean) / (ds @ ds))
    b = float(y_mean - a * s_mean)
    resid = y - (a * s + b)
    return LinearFit(a, b, float(resid @ resid / len(s)))


def ols_polynomial(points: Sequence[tuple[float, float]], degree: int = 2) -> PolynomialFit:
    """Least-squares polynomial (QR via lstsq) in descending powers."""
    s, y = _split_points(points)
    if len(set(s.tolist())) < degree + 1:
        raise ValueError(f"degree-{degree} fit needs >= {degree + 1} distinct abscissae")
    design = np.vander(s, degree + 1)
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < degree + 1:
        raise ValueError("rank-deficient design matrix")
    resid = y - design @ coef
    return PolynomialFit(tuple(float(c) for c in coef), float(resid @ resid / len(s)))


def gaussian_bump(s: np.ndarray, theta: np.ndarray) -> np.ndarray:
    amplitude, center, width = theta
    return amplitude * np.exp(-(((s - center) / width) ** 2))


def gaussian_bump_jacobian(s: np.ndarray, theta: np.ndarray) -> np.ndarray:
    amplitude, center, width = theta
    u = (s - center) / width
    e = np.exp(-(u**2))
    return np.column_stack((e, amplitude * e * 2 * u / width, amplitude * e * 2 * u**2 / width))


def double_gaussian_bump(s: np.ndarray, theta: np.ndarray) -> np.ndarray:
    return gaussian_bump(s, theta[:3]) + gaussian_bump(s, theta[3:])


def double_gaussian_bump_jacobian(s: np.ndarray, theta: np.ndarray) -> np.ndarray:
    return np.hstack((gaussian_bump_jacobian(s, theta[:3]), gaussian_bump_jacobian(s, theta[3:])))


def gaussian_pdf(x: np.ndarray, theta: np.ndarray) -> np.ndarray:
    mu, sigma = theta
    z = (x - mu) / sigma
    return np.exp(-0.5 * z**2) / (math.sqrt(2 * math.pi) * sigma)


def gaussian_pdf_jacobian(x: np.ndarray, theta: np.ndarray) -> np.ndarray:
    mu, sigma = theta
    z = (x - mu) / sigma
    f = gaussian_pdf(x, theta)
    return np.column_stack((f * z / sigma, f * (z**2 - 1) / sigma))


def levenberg_marquardt(
    model: Callable[[np.ndarray, np.ndarray], np.ndarray],
    jacobian: Callable[[np.ndarray, np.ndarray], np.ndarray],
    theta0: Sequence[float],
    x: np.ndarray,
    y: np.ndarray,
) -> tuple[np.ndarray, float, int, bool, list[float]]:
    """Damped Gauss-Newton minimisation of ``sum((y - model(x, theta))**2)``.

    Damping starts at LM_DAMPING_INIT, grows x10 on a rejected step and
    shrinks /10 on an accepted one; a step is accepted only if it strictly
    lowers the cost. Stops on relative cost decrease < LM_FTOL, step norm
    < LM_XTOL, or LM_MAX_ITERATIONS (returned flagged as non-converged).

    Returns (theta, cost, iterations, converged, accepted cost history).
    """
    theta = np.asarray(theta0, dtype=float).copy()
    lam = LM_DAMPING_INIT
    residual = y - model(x, theta)
    cost = float(residual @ residual)
    history = [cost]
    iterations = 0
    converged = False
    identity = np.eye(len(theta))
    while iterations < LM_MAX_ITERATIONS:
        iterations += 1
        jac = jacobian(x, theta)
        gradient = jac.T @ residual
        hessian = jac.T @ jac
        try:
            step = np.linalg.solve(hessian + lam * identity, gradient)
        except np.linalg.LinAlgError:
            lam *= 10
            continue
        if float(np.linalg.norm(step)) < LM_XTOL:
            converged = True
            break
        trial = theta + step
        trial_residual = y - model(x, trial)
        trial_cost = float(trial_residual @ trial_residual)
        if trial_cost < cost:
            relative_drop = (cost - trial_cost) / cost if cost > 0 else 0.0
            theta, residual, cost = trial, trial_residual, trial_cost
            history.append(cost)
            lam = max(lam / 10, 1e-15)
            if relative_drop < LM_FTOL:
                converged = True
                break
        else:
            lam *= 10
            if lam > 1e15:
                break
    return theta, cost, iterations, converged, history


def _local_maxima(y: np.ndarray) -> list[int]:
    idx = []
    n = len(y)
    for i in range(n):
        left = y[i - 1] if i > 0 else -math.inf
        right = y[i + 1] if i < n - 1 else -math.inf
        if y[i] >= left and y[i] >= right:
            idx.append(i)
    idx.sort(key=lambda i: (-y[i], i))
    return idx


def lm_gaussian(
    points: Sequence[tuple[float, float]],
    init: tuple[float, float, float] | None = None,
) -> GaussianCurveFit:
    """Fit ``A * exp(-((s - m) / w)**2)``; default start at the data peak."""
    s, y = _split_points(points)
    if len(s) < 3:
        raise ValueError("gaussian fit needs >= 3 points")
    if not np.any(y):
        raise ValueError("all-zero ordinates: gaussian fit is degenerate")
    if init is None:
        init = (float(y.max()), float(s[int(np.argmax(y))]), 1.0)
    theta, cost, iterations, converged, _ = levenberg_marquardt(
        gaussian_bump, gaussian_bump_jacobian, init, s, y
    )
    return GaussianCurveFit(
        amplitude=float(theta[0]),
        center=float(theta[1]),
        width=abs(float(theta[2])),
        residual_mse=cost / len(s),
        converged=converged,
        iterations=iterations,
    )


def lm_double_gaussian(
    points: Sequence[tuple[float, float]],
    init: Sequence[float] | None = None,
) -> DoubleGaussianCurveFit:
    """Fit a sum of two bumps; components come back ordered m1 <= m2.

    The default start seeds the two highest separated local maxima of y
    (falling back to a range split when the data shows a single peak),
    unit widths.
    """
    s, y = _split_points(points)
    if len(s) < 6:
        raise ValueError("double-gaussian fit needs >= 6 points")
    if not np.any(y):
        raise ValueError("all-zero ordinates: fit is degenerate")
    if init is None:
        maxima = _local_maxima(y)
        peaks = [maxima[0]]
        for i in maxima[1:]:
            if s[i] != s[peaks[0]]:
                peaks.append(i)
                break
        if len(peaks) < 2:
            # single peak: seed the second component at the far end of the range
            far = int(np.argmax(np.abs(s - s[peaks[0]])))
            peaks.append(far)
        i1, i2 = peaks
        init = (float(y[i1]), float(s[i1]), 1.0, float(y[i2]), float(s[i2]), 1.0)
    theta, cost, iterations, converged, _ = levenberg_marquardt(
        double_gaussian_bump, double_gaussian_bump_jacobian, init, s, y
    )
    first, second = (theta[0], theta[1], abs(theta[2])), (theta[3], theta[4], abs(theta[5]))
    if first[1] > second[1]:
        first, second = second, first
    return DoubleGaussianCurveFit(
        a1=float(first[0]),
        m1=float(first[1]),
        w1=float(first[2]),
        a2=float(second[0]),
        m2=float(second[1]),
        w2=float(second[2]),
        residual_mse=cost / len(s),
        converged=converged,
        iterations=iterations,
        collapsed=abs(first[1] - second[1]) < 1e-6,
    )


def lm_gaussian_pdf(
    grid: Sequence[tuple[float, float]],
    init: tuple[float, float],
) -> GaussianPdfFit:
    """Fit the normalized Gaussian density to (x, density) grid points."""
    x, density = _split_points(grid)
    if len(x) < 3:
        raise ValueError("pdf fit needs >= 3 grid points")
    if init[1] <= 0:
        raise ValueError("initial sigma must be > 0")
    theta, cost, iterations, converged, _ = levenberg_marquardt(
        gaussian_pdf, gaussian_pdf_jacobian, init, x, density
    )
    return GaussianPdfFit(
        mu=float(theta[0]),
        sigma=abs(float(theta[1])),
        residual_mse=cost / len(x),
        converged=converged,
        iterations=iterations,
    )


def select_sigma_model(fits: dict[str, object]) -> str:
    """Pick the spread model with the lowest residual MSE; near-ties
    (relative 1e-9) go to the fewest-parameter candidate."""
    unknown = set(fits) - set(MODEL_PARAM_COUNTS)
    if unknown:
        raise ValueError(f"unknown model tags: {sorted(unknown)}")
    best_mse = min(fit.residual_mse for fit in fits.values())
    tolerance = best_mse * 1e-9 + 1e-30
    contenders = [tag for tag, fit in fits.items() if fit.residual_mse <= best_mse + tolerance]
    return min(contenders, key=lambda tag: (MODEL_PARAM_COUNTS[tag], _MODEL_ORDER.index(tag)))
