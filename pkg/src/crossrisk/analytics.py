"""Signal derivation, rolling statistics and the quantitative risk metric.

Per-instrument signals (log returns by default, z-scores on request) are
combined into a weighted aggregate; rolling sample volatility and the
cross-instrument covariance matrix are reduced to two scalars that the
risk metric blends:

    r = beta1 * volatility_term + beta2 * covariance_term

The volatility term is the signal-weighted average of per-instrument
rolling standard deviations; the covariance term is the mean of the
strictly off-diagonal entries of the sample covariance matrix, so
co-movement is counted once and individual variance stays in the first
term. Heavy lifting goes through the kernels backend (compiled when
available).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from typing import Mapping, Optional, Sequence

import numpy as np

from . import kernels
from .errors import (
    InsufficientHistory,
    KeyMismatch,
    MisalignedWindows,
    NonPositivePrice,
    NotSymmetric,
)

DEFAULT_WINDOW = 30
SYMMETRY_TOLERANCE = 1e-9


class SignalDerivation(Enum):
    LOG_RETURN = "log_return"
    Z_SCORE = "z_score"


@dataclass(frozen=True)
class SignalSet:
    """Per-instrument signal values at one tick."""

    values: Mapping[str, float]
    derivation: SignalDerivation = SignalDerivation.LOG_RETURN

    def __post_init__(self):
        for key, value in self.values.items():
            if not math.isfinite(value):
                raise ValueError(f"signal for {key!r} must be finite, got {value!r}")


@dataclass(frozen=True)
class SignalWeights:
    """Non-negative per-instrument weights summing to one."""

    weights: Mapping[str, float]

    def __post_init__(self):
        if not self.weights:
            raise ValueError("signal weights must not be empty")
        total = 0.0
        for key, value in self.weights.items():
            if value < 0.0 or not math.isfinite(value):
                raise ValueError(f"weight for {key!r} must be a finite non-negative real")
            total += value
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"signal weights must sum to 1 (got {total!r})")

    @classmethod
    def uniform(cls, instrument_ids: Sequence[str]) -> "SignalWeights":
        ids = sorted(instrument_ids)
        if not ids:
            raise ValueError("need at least one instrument")
        return cls(weights={i: 1.0 / len(ids) for i in ids})


@dataclass(frozen=True)
class RiskParams:
    beta1: float = 1.0
    beta2: float = 1.0
    window: int = DEFAULT_WINDOW

    def __post_init__(self):
        if not (math.isfinite(self.beta1) and self.beta1 >= 0.0):
            raise ValueError(f"beta1 must be finite and >= 0, got {self.beta1!r}")
        if not (math.isfinite(self.beta2) and self.beta2 >= 0.0):
            raise ValueError(f"beta2 must be finite and >= 0, got {self.beta2!r}")
        if self.window < 2:
            raise ValueError(f"window must be >= 2, got {self.window!r}")


@dataclass(frozen=True)
class RiskValue:
    """Quantitative risk with its two components, exactly as combined."""

    volatility_term: float
    covariance_term: float
    r: float
    timestamp: Optional[datetime] = None


def log_return(prev_close: float, close: float) -> float:
    """Natural log of close / prev_close; both prices must be > 0."""
    if prev_close <= 0.0 or close <= 0.0:
        raise NonPositivePrice(f"prices must be > 0, got {prev_close!r} -> {close!r}")
    return math.log(close / prev_close)


def zscore(window_values: Sequence[float]) -> float:
    """Z-score of the last value within its window; 0 for a flat window."""
    if len(window_values) < 2:
        raise InsufficientHistory("z-score needs at least 2 values")
    arr = np.asarray(window_values, dtype=np.float64)
    std = kernels.sample_std(arr)
    if std == 0.0:
        return 0.0
    return float((arr[-1] - arr.mean()) / std)


def rolling_volatility(returns: Sequence[float], window: int) -> float:
    """Sample standard deviation (n-1 denominator) of the last `window` returns."""
    if window < 2:
        raise ValueError(f"window must be >= 2, got {window!r}")
    tail = np.asarray(returns[-window:] if len(returns) > window else returns, dtype=np.float64)
    if tail.size < 2:
        raise InsufficientHistory(f"need at least 2 returns, got {tail.size}")
    return kernels.sample_std(tail)


def covariance_matrix(windows: Mapping[str, Sequence[float]]) -> np.ndarray:
    """Sample covariance matrix over aligned per-instrument return windows.

    Rows/columns follow sorted instrument ids. Windows must share one
    length >= 2; at least two instruments are required.
    """
    ids = sorted(windows)
    if len(ids) < 2:
        raise ValueError("covariance needs at least 2 instruments")
    lengths = {len(windows[i]) for i in ids}
    if len(lengths) != 1:
        raise MisalignedWindows(f"window lengths differ: {sorted(lengths)}")
    n = lengths.pop()
    if n < 2:
        raise InsufficientHistory(f"need windows of length >= 2, got {n}")
    rows = np.asarray([windows[i] for i in ids], dtype=np.float64)
    return np.asarray(kernels.sample_cov(rows))


def aggregate_v(signal_vols: Mapping[str, float], w: SignalWeights) -> float:
    """Weighted average of per-instrument volatilities: sum_s w_s * vol_s."""
    if set(signal_vols) != set(w.weights):
        raise KeyMismatch("volatility keys do not match weight keys")
    ids = sorted(signal_vols)
    return kernels.weighted_sum(
        np.asarray([signal_vols[i] for i in ids], dtype=np.float64),
        np.asarray([w.weights[i] for i in ids], dtype=np.float64),
    )


def aggregate_cov(cov: np.ndarray) -> float:
    """Mean of the strictly off-diagonal entries of a symmetric matrix."""
    m = np.asarray(cov, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2:
        raise ValueError(f"expected a square matrix of order >= 2, got shape {m.shape}")
    if not np.allclose(m, m.T, atol=SYMMETRY_TOLERANCE, rtol=0.0):
        raise NotSymmetric("covariance matrix is not symmetric")
    n = m.shape[0]
    off = m.sum() - np.trace(m)
    return float(off / (n * (n - 1)))


def risk_metric(v: float, cov: float, p: RiskParams, timestamp: Optional[datetime] = None) -> RiskValue:
    """Blend the two risk components: r = beta1 * v + beta2 * cov."""
    if not (math.isfinite(v) and math.isfinite(cov)):
        raise ValueError("risk components must be finite")
    return RiskValue(
        volatility_term=v,
        covariance_term=cov,
        r=p.beta1 * v + p.beta2 * cov,
        timestamp=timestamp,
    )


def aggregate_signal(signals: SignalSet, w: SignalWeights) -> float:
    """Weighted signal aggregate: sum_s w_s * signal_s."""
    if set(signals.values) != set(w.weights):
        raise KeyMismatch("signal keys do not match weight keys")
    ids = sorted(signals.values)
    return kernels.weighted_sum(
        np.asarray([signals.values[i] for i in ids], dtype=np.float64),
        np.asarray([w.weights[i] for i in ids], dtype=np.float64),
    )
