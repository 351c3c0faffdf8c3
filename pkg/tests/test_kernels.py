"""Backend parity: compiled kernels vs the numpy fallback."""

import math

import numpy as np
import pytest

from crossrisk.kernels import _fallback

try:
    from crossrisk.kernels import _ext
except ImportError:
    _ext = None

BACKENDS = [_fallback] if _ext is None else [_fallback, _ext]
PAIRWISE = pytest.mark.skipif(_ext is None, reason="compiled kernels not built")


@pytest.mark.parametrize("impl", BACKENDS)
def test_sample_std_matches_naive(impl):
    rng = np.random.default_rng(1)
    for _ in range(200):
        x = rng.normal(size=int(rng.integers(2, 80)))
        mean = x.sum() / x.size
        expected = math.sqrt(((x - mean) ** 2).sum() / (x.size - 1))
        assert impl.sample_std(x) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("impl", BACKENDS)
def test_sample_cov_symmetric_and_correct(impl):
    rng = np.random.default_rng(2)
    for _ in range(50):
        k = int(rng.integers(2, 7))
        n = int(rng.integers(2, 40))
        m = rng.normal(size=(k, n))
        got = np.asarray(impl.sample_cov(m))
        expected = np.cov(m, ddof=1)
        assert np.allclose(got, expected, atol=1e-12)
        assert np.allclose(got, got.T)


@pytest.mark.parametrize("impl", BACKENDS)
def test_weighted_ops(impl):
    v = np.array([1.0, 2.0, 4.0])
    w = np.array([0.2, 0.3, 0.5])
    assert impl.weighted_sum(v, w) == pytest.approx(0.2 + 0.6 + 2.0, abs=1e-15)
    assert impl.weighted_mean(v, w * 7) == pytest.approx(2.8, abs=1e-12)


@pytest.mark.parametrize("impl", BACKENDS)
def test_abs_pearson_degenerate_and_bounds(impl):
    rng = np.random.default_rng(3)
    assert impl.abs_pearson(np.ones(10), rng.normal(size=10)) == 0.0
    x = rng.normal(size=50)
    assert impl.abs_pearson(x, -2.5 * x) == pytest.approx(1.0, abs=1e-12)
    for _ in range(100):
        a = rng.normal(size=30)
        b = rng.normal(size=30)
        r = impl.abs_pearson(a, b)
        assert 0.0 <= r <= 1.0


@PAIRWISE
def test_backends_agree():
    rng = np.random.default_rng(4)
    for _ in range(300):
        n = int(rng.integers(2, 100))
        x = rng.normal(size=n)
        y = rng.normal(size=n)
        w = rng.random(n) + 0.01
        assert _ext.sample_std(x) == pytest.approx(_fallback.sample_std(x), abs=1e-12)
        assert _ext.weighted_sum(x, w) == pytest.approx(_fallback.weighted_sum(x, w), abs=1e-10)
        assert _ext.weighted_mean(x, w) == pytest.approx(_fallback.weighted_mean(x, w), abs=1e-12)
        assert _ext.abs_pearson(x, y) == pytest.approx(_fallback.abs_pearson(x, y), abs=1e-12)
    for _ in range(50):
        m = rng.normal(size=(int(rng.integers(2, 8)), int(rng.integers(2, 60))))
        assert np.allclose(_ext.sample_cov(m), _fallback.sample_cov(m), atol=1e-12)


def test_env_var_forces_fallback(tmp_path):
    import subprocess
    import sys

    proc = subprocess.run(
        [sys.executable, "-c", "import crossrisk; print(crossrisk.KERNEL_BACKEND)"],
        capture_output=True,
        text=True,
        env={"PATH": "/usr/bin:/bin", "CROSSRISK_PURE_PYTHON": "1"},
    )
    assert proc.stdout.strip() == "python"
