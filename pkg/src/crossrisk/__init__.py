"""crossrisk: a cross-asset risk engine.

Fuses weighted market-data sources, derives rolling volatility and
covariance based risk metrics, contextualizes them with text-derived
sentiment, gates alerts on a reliability score, and validates itself by
deterministic replay backtesting.
"""

__version__ = "0.1.0"

from .kernels import BACKEND as KERNEL_BACKEND

__all__ = ["KERNEL_BACKEND", "__version__"]
