"""Synthetic market generator: reproducibility, planted structure."""

import math

import numpy as np
import pytest

from crossrisk.errors import InvalidSpec
from crossrisk.model import AssetClass, SourceKind
from crossrisk.synthetic import (
    NewsEventSpec,
    SyntheticInstrumentSpec,
    SyntheticMarketSpec,
    SyntheticSourceSpec,
    build_store,
    generate_market_data,
    generate_synthetic_market,
    spec_from_dict,
)

from conftest import day


def three_class_spec(seed=42, days=504, correlation=0.6):
    return SyntheticMarketSpec(
        seed=seed,
        days=days,
        correlation=correlation,
        instruments=(
            SyntheticInstrumentSpec("eq_alpha", AssetClass.EQUITY, drift=0.0004, vol=0.012),
            SyntheticInstrumentSpec("fi_bund", AssetClass.FIXED_INCOME, drift=0.0001, vol=0.004),
            SyntheticInstrumentSpec("fx_eurusd", AssetClass.CURRENCY, drift=0.0, vol=0.007),
        ),
        sources=(
            SyntheticSourceSpec("hist_feed", SourceKind.HISTORICAL_DATA, mode="noise"),
            SyntheticSourceSpec("flows", SourceKind.INVESTOR_FEEDBACK, mode="noise"),
        ),
        news=(NewsEventSpec(day=40, polarity="negative", count=2, shock=-0.03),),
        background_news_every=7,
    )


def test_same_seed_identical_files(tmp_path):
    a = generate_synthetic_market(three_class_spec(), tmp_path / "a")
    b = generate_synthetic_market(three_class_spec(), tmp_path / "b")
    for key in a:
        assert a[key].read_bytes() == b[key].read_bytes()


def test_different_seed_differs(tmp_path):
    a = generate_synthetic_market(three_class_spec(seed=1), tmp_path / "a")
    b = generate_synthetic_market(three_class_spec(seed=2), tmp_path / "b")
    assert a["bars"].read_bytes() != b["bars"].read_bytes()


def test_requested_correlation_realized_within_tolerance():
    data = generate_market_data(three_class_spec(correlation=0.6, days=504))
    closes = {}
    for bar in data.bars:
        closes.setdefault(bar.instrument_id, []).append(bar.close)
    rets = {
        k: np.diff(np.log(np.asarray(v))) for k, v in closes.items()
    }
    ids = sorted(rets)
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            sample = np.corrcoef(rets[ids[i]], rets[ids[j]])[0, 1]
            assert abs(sample - 0.6) <= 0.1


def test_zero_vol_spec_constant_prices():
    spec = SyntheticMarketSpec(
        seed=7,
        days=10,
        instruments=(SyntheticInstrumentSpec("flat", AssetClass.EQUITY, drift=0.0, vol=0.0),),
    )
    data = generate_market_data(spec)
    closes = [b.close for b in data.bars]
    assert all(c == closes[0] for c in closes)


def test_shock_applied_on_scheduled_day():
    base = three_class_spec()
    calm = SyntheticMarketSpec(
        seed=base.seed,
        days=base.days,
        correlation=base.correlation,
        instruments=base.instruments,
        sources=base.sources,
        news=(),
        background_news_every=base.background_news_every,
    )
    shocked = generate_market_data(base)
    unshocked = generate_market_data(calm)

    def close_at(data, inst, d):
        return next(b.close for b in data.bars if b.instrument_id == inst and b.timestamp == day(d))

    for inst in ("eq_alpha", "fi_bund", "fx_eurusd"):
        ret_shocked = math.log(close_at(shocked, inst, 40) / close_at(shocked, inst, 39))
        ret_calm = math.log(close_at(unshocked, inst, 40) / close_at(unshocked, inst, 39))
        assert ret_shocked == pytest.approx(ret_calm - 0.03, abs=1e-12)


def test_news_polarity_uses_lexicons():
    from crossrisk.textinsight import stub_score

    spec = SyntheticMarketSpec(
        seed=3,
        days=20,
        instruments=(SyntheticInstrumentSpec("x", AssetClass.EQUITY),),
        news=(
            NewsEventSpec(day=5, polarity="negative"),
            NewsEventSpec(day=6, polarity="positive"),
            NewsEventSpec(day=7, polarity="neutral"),
        ),
    )
    data = generate_market_data(spec)
    by_day = {doc.timestamp: doc for doc in data.news}
    assert stub_score(by_day[day(5)].headline + " " + by_day[day(5)].body) < 0
    assert stub_score(by_day[day(6)].headline + " " + by_day[day(6)].body) > 0
    assert stub_score(by_day[day(7)].headline + " " + by_day[day(7)].body) == 0.0


def test_next_return_source_matches_realized_returns():
    spec = SyntheticMarketSpec(
        seed=11,
        days=30,
        instruments=(SyntheticInstrumentSpec("x", AssetClass.EQUITY, drift=0.001, vol=0.02),),
        sources=(SyntheticSourceSpec("oracle", SourceKind.HISTORICAL_DATA, mode="next_return"),),
    )
    store, kinds = build_store(spec)
    assert kinds == {"oracle": SourceKind.HISTORICAL_DATA}
    bars = store.query_bars("x", day(0), day(30))
    obs = store.query_observations("oracle")
    assert len(obs) == 29  # no observation on the final day
    for i, ob in enumerate(obs):
        realized = math.log(bars[i + 1].close / bars[i].close)
        assert ob.value == pytest.approx(realized, abs=1e-12)


def test_invalid_specs_rejected():
    inst = (SyntheticInstrumentSpec("x", AssetClass.EQUITY),)
    with pytest.raises(InvalidSpec):
        SyntheticMarketSpec(seed=1, days=1, instruments=inst)
    with pytest.raises(InvalidSpec):
        SyntheticMarketSpec(seed=1, days=10, instruments=())
    with pytest.raises(InvalidSpec):
        SyntheticMarketSpec(seed=1, days=10, instruments=inst, correlation=1.5)
    with pytest.raises(InvalidSpec):
        SyntheticMarketSpec(
            seed=1, days=10, instruments=inst, news=(NewsEventSpec(day=10),)
        )
    with pytest.raises(InvalidSpec):
        SyntheticMarketSpec(
            seed=1,
            days=10,
            instruments=(SyntheticInstrumentSpec("x", AssetClass.EQUITY, vol=-0.1),),
        )


def test_spec_round_trip_from_dict():
    payload = {
        "seed": 5,
        "days": 60,
        "correlation": 0.2,
        "instruments": [
            {"id": "a", "asset_class": "equity", "drift": 0.001, "vol": 0.01},
            {"id": "b", "asset_class": "currency"},
        ],
        "sources": [{"id": "s", "kind": "historical_data", "mode": "next_return"}],
        "news": [{"day": 3, "polarity": "negative", "count": 2, "shock": -0.02}],
    }
    spec = spec_from_dict(payload)
    assert spec.days == 60
    assert spec.instruments[1].vol == 0.01  # default
    assert spec.sources[0].mode == "next_return"
    assert spec.news[0].shock == -0.02
    with pytest.raises(InvalidSpec):
        spec_from_dict({"instruments": []})
