"""Least-squares fitting of inverse-power models with confidence domains.

Per-element cost curves flatten as the input grows, so they are modeled
as f(x) = sum_{k=1..N} a_k / x**k + a_inf over x = log(vector size). The
fit minimizes the Euclidean residual norm under homoscedastic errors,
which makes generalized least squares coincide with ordinary least
squares; the normal equations are solved through a QR factorization of
the design matrix because the inverse-power basis is badly conditioned
and explicit inversion of X'X would lose digits.

The asymptotic confidence domain for the coefficient vector is a box in
the coordinates induced by the LDL' factorization of (X'X)^-1, scaled by
the residual standard deviation, with the sup-norm radius chosen so that
the product of per-coordinate normal probabilities equals the requested
level.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ._validation import as_1d_float_array, require_all_positive, require_finite
from .errors import (
    ConfigError,
    IllConditionedError,
    NumericalError,
    UnderdeterminedError,
)

#: Condition-number bound past which the design matrix is treated as
#: numerically singular in double precision.
CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class FitResult:
    """Fitted inverse-power model for one (operation, metric) pair.

    `coefficients` holds (a_1, ..., a_N, a_inf) with the constant term
    last, in the units of the fitted metric.
    """

    degree: int
    coefficients: np.ndarray
    r_squared: float
    sigma_hat: float
    n_samples: int
    xtx_inverse: np.ndarray | None = field(default=None, repr=False)
    x_range: tuple[float, float] | None = None

    @property
    def intercept(self) -> float:
        return float(self.coefficients[-1])

    def to_dict(self) -> dict:
        doc = {
            "degree": self.degree,
            "coefficients": [float(c) for c in self.coefficients],
            "r_squared": self.r_squared,
            "sigma_hat": self.sigma_hat,
            "n_samples": self.n_samples,
        }
        if self.x_range is not None:
            doc["x_range"] = [self.x_range[0], self.x_range[1]]
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "FitResult":
        try:
            degree = int(doc["degree"])
            coefficients = np.asarray(doc["coefficients"], dtype=float)
            r_squared = float(doc["r_squared"])
            sigma_hat = float(doc["sigma_hat"])
            n_samples = int(doc["n_samples"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid fit document: {exc!r}") from None
        if coefficients.size != degree + 1:
            raise ConfigError(
                f"fit document has {coefficients.size} coefficients for degree {degree}"
            )
        x_range = None
        if doc.get("x_range") is not None:
            lo, hi = doc["x_range"]
            x_range = (float(lo), float(hi))
        return cls(degree, coefficients, r_squared, sigma_hat, n_samples, None, x_range)

    @classmethod
    def from_json(cls, text: str) -> "FitResult":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"fit document is not valid JSON: {exc}") from None
        return cls.from_dict(doc)


def build_design_matrix(xs, degree: int) -> np.ndarray:
    """Rows (1/x, 1/x**2, ..., 1/x**degree, 1) at each sample point."""
    xs = as_1d_float_array(xs, "xs")
    require_finite(xs, "xs")
    require_all_positive(xs, "xs")
    if degree < 1:
        raise ValueError(f"degree must be at least 1, got {degree}")
    columns = [xs**-k for k in range(1, degree + 1)]
    columns.append(np.ones_like(xs))
    return np.column_stack(columns)


def fit_inverse_power(xs, ys, degree: int) -> FitResult:
    """Least-squares fit of sum_k a_k/x**k + a_inf to (xs, ys).

    Needs at least degree+1 points; with exactly degree+1 the model
    interpolates and sigma_hat is reported as 0. Raises
    IllConditionedError when the design matrix condition number exceeds
    CONDITION_LIMIT, which is the cue to retry with a smaller degree.
    """
    ys = as_1d_float_array(ys, "ys")
    require_finite(ys, "ys")
    X = build_design_matrix(xs, degree)
    n, p = X.shape
    if ys.size != n:
        raise ValueError(f"xs has {n} entries but ys has {ys.size}")
    if n < p:
        raise UnderdeterminedError(
            f"{n} observations cannot determine {p} coefficients (degree {degree})"
        )

    q, r = np.linalg.qr(X)
    singular_values = np.linalg.svd(r, compute_uv=False)
    if singular_values[-1] == 0 or singular_values[0] / singular_values[-1] > CONDITION_LIMIT:
        raise IllConditionedError(
            f"design matrix condition exceeds {CONDITION_LIMIT:.0e} at degree "
            f"{degree}; use a smaller degree"
        )
    coefficients = np.linalg.solve(r, q.T @ ys)

    residuals = ys - X @ coefficients
    ssr = float(residuals @ residuals)
    sst = float(np.sum((ys - ys.mean()) ** 2))
    # constant data: SST is pure rounding noise and the intercept fits
    # exactly, so report a perfect fit instead of dividing dust by dust
    sst_floor = (np.finfo(float).eps * n * max(np.max(np.abs(ys)), 1e-300)) ** 2
    r_squared = 1.0 if sst <= sst_floor else min(max(1.0 - ssr / sst, 0.0), 1.0)
    dof = n - p
    sigma_hat = float(np.sqrt(ssr / dof)) if dof > 0 else 0.0

    r_inv = np.linalg.solve(r, np.eye(p))
    xtx_inverse = r_inv @ r_inv.T

    return FitResult(
        degree=degree,
        coefficients=coefficients,
        r_squared=r_squared,
        sigma_hat=sigma_hat,
        n_samples=n,
        xtx_inverse=xtx_inverse,
        x_range=(float(np.min(xs)), float(np.max(xs))),
    )


def evaluate_fit(fit: FitResult, x):
    """Evaluate the fitted model at x (scalar or array); x must be > 0."""
    scalar = np.isscalar(x)
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    require_all_positive(arr, "x")
    # term-by-term a_k / x**k keeps the arithmetic identical to direct
    # summation of the model formula; the terms cancel heavily, so even
    # ulp-level deviations per term would be visible in the result
    result = np.full(arr.shape, fit.intercept)
    for k in range(1, fit.degree + 1):
        result += fit.coefficients[k - 1] / arr**k
    return float(result[0]) if scalar else result


def confidence_box_radius(alpha: float, n_params: int) -> float:
    """Sup-norm radius giving joint level 1-alpha over n_params coordinates.

    Solves (2*Phi(r) - 1)**n_params = 1 - alpha; for a single parameter
    this reduces to the usual two-sided normal quantile.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    if n_params < 1:
        raise ValueError("n_params must be at least 1")
    from scipy.stats import norm  # deferred; scipy is slow to import

    return float(norm.ppf(((1.0 - alpha) ** (1.0 / n_params) + 1.0) / 2.0))


@dataclass(frozen=True)
class ConfidenceDomain:
    """Asymptotic sup-norm confidence box for the coefficient vector.

    The box is centered at the estimate and spanned by L*sqrt(D) from the
    LDL' factorization of (X'X)^-1, scaled by the residual standard
    deviation, so the estimator covariance sigma^2 (X'X)^-1 maps it to a
    unit-coordinate cube of half-width `radius`.
    """

    center: np.ndarray
    lower: np.ndarray = field(repr=False)
    diagonal: np.ndarray = field(repr=False)
    scale: float
    radius: float
    level: float

    def contains(self, vector) -> bool:
        """Whether a coefficient vector lies inside the domain."""
        vector = as_1d_float_array(vector, "vector")
        if vector.size != self.center.size:
            raise ValueError(
                f"vector has {vector.size} entries, expected {self.center.size}"
            )
        transform = self.lower * np.sqrt(self.diagonal)
        z = np.linalg.solve(transform, vector - self.center) / self.scale
        return bool(np.max(np.abs(z)) < self.radius)


def confidence_domain(fit: FitResult, alpha: float) -> ConfidenceDomain:
    """Confidence domain of joint asymptotic level 1-alpha for the fit."""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    if fit.xtx_inverse is None:
        raise NumericalError("fit carries no (X'X)^-1; refit from data")
    if fit.sigma_hat <= 0:
        raise NumericalError(
            "confidence domain needs a positive residual deviation; "
            "the fit interpolates its data exactly"
        )
    try:
        chol = np.linalg.cholesky(fit.xtx_inverse)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"(X'X)^-1 is not positive definite: {exc}") from None
    diag = np.diagonal(chol).copy()
    lower = chol / diag
    return ConfidenceDomain(
        center=fit.coefficients.copy(),
        lower=lower,
        diagonal=diag**2,
        scale=fit.sigma_hat,
        radius=confidence_box_radius(alpha, fit.degree + 1),
        level=1.0 - alpha,
    )


def select_degree(xs, ys, max_degree: int, r2_threshold: float) -> FitResult:
    """Smallest degree reaching the R^2 threshold, else the best fit found.

    Degrees are tried in increasing order and the search stops at the
    first fit whose R^2 meets the threshold, so higher degrees are never
    touched once a sufficient one exists.
    """
    if max_degree < 1:
        raise ValueError(f"max_degree must be at least 1, got {max_degree}")
    if not 0 < r2_threshold < 1:
        raise ValueError(f"r2_threshold must lie in (0, 1), got {r2_threshold!r}")
    best: FitResult | None = None
    for degree in range(1, max_degree + 1):
        fit = fit_inverse_power(xs, ys, degree)
        if fit.r_squared >= r2_threshold:
            return fit
        if best is None or fit.r_squared > best.r_squared:
            best = fit
    assert best is not None
    return best
