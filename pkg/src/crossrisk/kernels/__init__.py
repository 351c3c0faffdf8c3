"""Numeric kernel backend selection.

Prefers the compiled Cython extension when it was built; otherwise the
numpy fallback. Set CROSSRISK_PURE_PYTHON=1 to force the fallback (used
by the parity tests and the benchmark). `BACKEND` reports the choice.
"""

import os

if os.environ.get("CROSSRISK_PURE_PYTHON"):
    from . import _fallback as _impl

    BACKEND = "python"
else:
    try:
        from . import _ext as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        from . import _fallback as _impl  # type: ignore[no-redef]

        BACKEND = "python"

sample_std = _impl.sample_std
sample_cov = _impl.sample_cov
weighted_mean = _impl.weighted_mean
weighted_sum = _impl.weighted_sum
abs_pearson = _impl.abs_pearson

__all__ = [
    "BACKEND",
    "sample_std",
    "sample_cov",
    "weighted_mean",
    "weighted_sum",
    "abs_pearson",
]
