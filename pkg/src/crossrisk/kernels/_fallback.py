"""Pure-Python (numpy) implementations of the hot numeric kernels.

Same contracts as the compiled module in _ext.pyx; selected at import
time by the package __init__ when the extension is unavailable or
CROSSRISK_PURE_PYTHON is set.
"""

import numpy as np


def sample_std(values: np.ndarray) -> float:
    """Sample standard deviation (n-1 denominator) of a 1-d array, len >= 2."""
    x = np.asarray(values, dtype=np.float64)
    return float(np.sqrt(np.sum((x - x.mean()) ** 2) / (x.size - 1)))


def sample_cov(rows: np.ndarray) -> np.ndarray:
    """Sample covariance matrix (n-1 denominator) of shape (k, n) rows, n >= 2."""
    m = np.asarray(rows, dtype=np.float64)
    centered = m - m.mean(axis=1, keepdims=True)
    return centered @ centered.T / (m.shape[1] - 1)


def weighted_mean(values: np.ndarray, weights: np.ndarray) -> float:
    """Sum(w*v) / Sum(w); weights need not be normalized."""
    v = np.asarray(values, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    return float(np.dot(w, v) / np.sum(w))


def weighted_sum(values: np.ndarray, weights: np.ndarray) -> float:
    """Plain Sum(w*v) for already-normalized weights."""
    v = np.asarray(values, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    return float(np.dot(w, v))


def abs_pearson(x: np.ndarray, y: np.ndarray) -> float:
    """Absolute Pearson correlation; 0.0 when either series is constant."""
    a = np.asarray(x, dtype=np.float64)
    b = np.asarray(y, dtype=np.float64)
    da = a - a.mean()
    db = b - b.mean()
    denom = np.sqrt(np.sum(da * da) * np.sum(db * db))
    if denom == 0.0:
        return 0.0
    r = abs(float(np.dot(da, db) / denom))
    return min(r, 1.0)
