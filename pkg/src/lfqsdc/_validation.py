"""Input validation helpers, in the spirit of ``sklearn.utils.validation``."""
from __future__ import annotations

import numbers

import numpy as np


def check_rng(random_state=None) -> np.random.Generator:
    """Turn ``None``, an int seed or a ``Generator`` into a ``Generator``.

    Unlike :func:`sklearn.utils.check_random_state` this returns the new-style
    :class:`numpy.random.Generator`, which is what every sampler here draws from.
    """
    if random_state is None:
        return np.random.default_rng()
    if isinstance(random_state, np.random.Generator):
        return random_state
    if isinstance(random_state, (numbers.Integral, np.integer)):
        return np.random.default_rng(int(random_state))
    if isinstance(random_state, np.random.SeedSequence):
        return np.random.default_rng(random_state)
    raise TypeError(f"cannot build a random Generator from {random_state!r}")


def check_probability(value, name: str) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0 or np.isnan(value):
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


def check_non_negative(value, name: str) -> float:
    value = float(value)
    if not value >= 0.0:
        raise ValueError(f"{name} must be >= 0, got {value}")
    return value


def check_positive(value, name: str) -> float:
    value = float(value)
    if not value > 0.0:
        raise ValueError(f"{name} must be > 0, got {value}")
    return value


def check_bits(bits, name: str = "bits") -> np.ndarray:
    """Return ``bits`` as a 1-D ``uint8`` array, rejecting anything but 0/1."""
    arr = np.asarray(bits)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0 and 1")
    return arr.astype(np.uint8, copy=False)


def check_bit_matrix(matrix, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(matrix)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0 and 1")
    return arr.astype(np.uint8, copy=False)


def check_finite_vector(values, name: str, length: int | None = None) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if length is not None and arr.shape[0] != length:
        raise ValueError(f"{name} must have length {length}, got {arr.shape[0]}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} must be finite")
    return arr
