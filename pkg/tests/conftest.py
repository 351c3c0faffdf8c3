"""Shared fixtures and helpers for the test suite."""

from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest

from crossrisk.model import AssetClass, Bar, Instrument, SeriesStore

BASE = datetime(2022, 1, 3, tzinfo=timezone.utc)


def day(i: int) -> datetime:
    """Timestamp of synthetic trading day i."""
    return BASE + timedelta(days=i)


def make_store(closes: dict[str, list[float]], asset_class=AssetClass.EQUITY) -> SeriesStore:
    """Store with one daily bar per close, all instruments registered."""
    store = SeriesStore()
    for inst_id, series in closes.items():
        store.register_instrument(Instrument(id=inst_id, asset_class=asset_class))
        for i, close in enumerate(series):
            store.append_bar(Bar(timestamp=day(i), instrument_id=inst_id, close=close))
    return store


@pytest.fixture
def store_one():
    return make_store({"aapl": [100.0 * (1.01 ** i) for i in range(40)]})
