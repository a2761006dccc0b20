"""Scikit-learn style wrappers around the core fitting and segmentation.

These estimators exist so the toolkit drops into pipelines, grid
searches and other ecosystem tooling: construction stores parameters
verbatim, `fit` validates and delegates to the functional core, and
`get_params`/`set_params` come from BaseEstimator.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from ._validation import as_1d_float_array
from .regression import ConfidenceDomain, FitResult, confidence_domain, evaluate_fit, fit_inverse_power
from .segmentation import SegmentationConfig, StepSegment, detect_steps, step_function_trace
from .trace import PowerTrace


class InversePowerRegression(RegressorMixin, BaseEstimator):
    """Regressor for y = sum_{k=1..degree} a_k / x**k + a_inf.

    X is a one-dimensional array (or a single column) of positive
    abscissas, typically log vector sizes.
    """

    def __init__(self, degree: int = 5):
        self.degree = degree

    def fit(self, X, y) -> "InversePowerRegression":
        x = as_1d_float_array(X, "X")
        result = fit_inverse_power(x, y, self.degree)
        self.result_: FitResult = result
        self.coef_ = result.coefficients[:-1].copy()
        self.intercept_ = result.intercept
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        self._check_fitted()
        return evaluate_fit(self.result_, as_1d_float_array(X, "X"))

    def confidence_domain(self, alpha: float = 0.05) -> ConfidenceDomain:
        self._check_fitted()
        return confidence_domain(self.result_, alpha)

    def _check_fitted(self):
        if not hasattr(self, "result_"):
            raise NotFittedError("call fit before using this estimator")


class StepSegmenter(BaseEstimator):
    """Transformer that approximates a PowerTrace by a step function.

    `fit` detects the segments, `transform` returns the piecewise
    constant trace sampled on the input grid, and `fit_predict` returns
    the segment list itself.
    """

    def __init__(
        self,
        min_segment_duration: float = 0.5,
        level_change_threshold: float = 1.0,
        smoothing_window: int = 5,
    ):
        self.min_segment_duration = min_segment_duration
        self.level_change_threshold = level_change_threshold
        self.smoothing_window = smoothing_window

    def _config(self) -> SegmentationConfig:
        return SegmentationConfig(
            min_segment_duration=self.min_segment_duration,
            level_change_threshold=self.level_change_threshold,
            smoothing_window=self.smoothing_window,
        )

    def fit(self, trace: PowerTrace, y=None) -> "StepSegmenter":
        self.segments_: list[StepSegment] = detect_steps(trace, self._config())
        return self

    def fit_predict(self, trace: PowerTrace, y=None) -> list[StepSegment]:
        return self.fit(trace).segments_

    def transform(self, trace: PowerTrace) -> PowerTrace:
        if not hasattr(self, "segments_"):
            raise NotFittedError("call fit before transform")
        return step_function_trace(self.segments_, trace)

    def fit_transform(self, trace: PowerTrace, y=None) -> PowerTrace:
        return self.fit(trace).transform(trace)
