"""Small input-validation helpers used by the data types and the estimator."""
from __future__ import annotations

import numpy as np

from .exceptions import ConfigError

PROB_SUM_TOL = 1e-12


def check_positive(name: str, value: float, allow_zero: bool = False) -> float:
    value = float(value)
    if allow_zero:
        if value < 0:
            raise ConfigError(f"{name} must be >= 0, got {value}")
    elif not value > 0:
        raise ConfigError(f"{name} must be > 0, got {value}")
    return value


def check_in_interval(name: str, value: float, lo: float, hi: float,
                      open_lo: bool = False, open_hi: bool = False) -> float:
    value = float(value)
    ok_lo = value > lo if open_lo else value >= lo
    ok_hi = value < hi if open_hi else value <= hi
    if not (ok_lo and ok_hi):
        raise ConfigError(f"{name} must lie in "
                          f"{'(' if open_lo else '['}{lo}, {hi}{')' if open_hi else ']'}, "
                          f"got {value}")
    return value


def check_probability_vector(p, size: int | None = None, tol: float = PROB_SUM_TOL) -> np.ndarray:
    """Validate a finite vector on the probability simplex and return it as float64."""
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 1:
        raise ConfigError(f"probability vector must be 1-D, got shape {arr.shape}")
    if size is not None and arr.size != size:
        raise ConfigError(f"probability vector must have length {size}, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ConfigError("probability vector contains non-finite entries")
    if arr.min() < 0 or arr.max() > 1 + tol:
        raise ConfigError("probabilities must lie in [0, 1]")
    if abs(arr.sum() - 1.0) > tol:
        raise ConfigError(f"probabilities must sum to 1 within {tol}, got {arr.sum()!r}")
    return arr


def check_power_of_two(name: str, value: int) -> int:
    value = int(value)
    if value < 2 or value & (value - 1):
        raise ConfigError(f"{name} must be a power of two >= 2, got {value}")
    return value
