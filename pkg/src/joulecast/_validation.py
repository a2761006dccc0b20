"""Small input-validation helpers used across the package."""

from __future__ import annotations

import numpy as np

from .errors import DomainError


def as_1d_float_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


def require_finite(arr: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")


def require_positive(value: float, name: str) -> None:
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value!r}")


def require_non_negative(value: float, name: str) -> None:
    if value < 0:
        raise ValueError(f"{name} must be non-negative, got {value!r}")


def require_all_positive(arr: np.ndarray, name: str) -> None:
    if arr.size and not np.all(arr > 0):
        bad = float(arr[arr <= 0][0])
        raise DomainError(f"{name} must be strictly positive, got {bad!r}")
