"""Domain types and the append-only time-series store.

All market and text data flows through the record types defined here:
daily bars, per-source observations and news documents, kept in a
SeriesStore that only ever grows. Queries return records in timestamp
order over half-open intervals; the store is the single source of truth
the replay and backtest layers read from.

File formats (flat files are the only persistence):
    bars          CSV    timestamp,instrument_id,asset_class,close
    observations  CSV    timestamp,source_id,source_kind,instrument_id,value
    news          JSONL  {timestamp, source_kind, headline, body, instrument_ids}

Timestamps are RFC 3339 UTC instants with millisecond precision.
"""

from __future__ import annotations

import bisect
import csv
import json
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .errors import (
    ConflictingDuplicate,
    NonFiniteValue,
    NonPositivePrice,
    UnknownInstrument,
)

BAR_HEADER = ["timestamp", "instrument_id", "asset_class", "close"]
OBSERVATION_HEADER = ["timestamp", "source_id", "source_kind", "instrument_id", "value"]
NEWS_KEYS = {"timestamp", "source_kind", "headline", "body", "instrument_ids"}

MAX_TOKEN_LENGTH = 64


class AssetClass(Enum):
    EQUITY = "equity"
    FIXED_INCOME = "fixed_income"
    CURRENCY = "currency"


class SourceKind(Enum):
    MARKET_NEWS = "market_news"
    FINANCIAL_REPORTS = "financial_reports"
    HISTORICAL_DATA = "historical_data"
    ECONOMIC_INDICATORS = "economic_indicators"
    ANALYST_REPORTS = "analyst_reports"
    INVESTOR_FEEDBACK = "investor_feedback"


def check_token(value: str, what: str = "token") -> str:
    """Validate an identifier token: non-empty ASCII, no whitespace, <= 64 chars."""
    if not isinstance(value, str) or not value:
        raise ValueError(f"{what} must be a non-empty string")
    if len(value) > MAX_TOKEN_LENGTH:
        raise ValueError(f"{what} exceeds {MAX_TOKEN_LENGTH} characters: {value[:80]!r}")
    if not value.isascii() or any(c.isspace() for c in value):
        raise ValueError(f"{what} must be ASCII without whitespace: {value!r}")
    return value


def parse_timestamp(text: str) -> datetime:
    """Parse an RFC 3339 timestamp into a UTC datetime at millisecond precision."""
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(raw)
    except ValueError as exc:
        raise ValueError(f"invalid RFC 3339 timestamp: {text!r}") from exc
    if dt.tzinfo is None:
        raise ValueError(f"timestamp must carry a UTC offset: {text!r}")
    return normalize_timestamp(dt)


def normalize_timestamp(dt: datetime) -> datetime:
    """Convert to UTC and truncate sub-millisecond precision."""
    if dt.tzinfo is None:
        raise ValueError("naive datetimes are not allowed")
    dt = dt.astimezone(timezone.utc)
    return dt.replace(microsecond=(dt.microsecond // 1000) * 1000)


def format_timestamp(dt: datetime) -> str:
    """Render a UTC datetime as RFC 3339 with a Z suffix."""
    dt = normalize_timestamp(dt)
    base = dt.strftime("%Y-%m-%dT%H:%M:%S")
    if dt.microsecond:
        base += f".{dt.microsecond // 1000:03d}"
    return base + "Z"


def _require_finite(value: float, what: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise NonFiniteValue(f"{what} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class Instrument:
    id: str
    asset_class: AssetClass
    quote_unit: str = "price-per-share"

    def __post_init__(self):
        check_token(self.id, "instrument id")
        if not isinstance(self.asset_class, AssetClass):
            raise ValueError(f"asset_class must be an AssetClass, got {self.asset_class!r}")


@dataclass(frozen=True)
class Bar:
    timestamp: datetime
    instrument_id: str
    close: float

    def __post_init__(self):
        object.__setattr__(self, "timestamp", normalize_timestamp(self.timestamp))
        check_token(self.instrument_id, "instrument id")
        close = _require_finite(self.close, "close")
        if close <= 0.0:
            raise NonPositivePrice(f"close must be > 0, got {close}")
        object.__setattr__(self, "close", close)


@dataclass(frozen=True)
class SourceObservation:
    timestamp: datetime
    source_id: str
    source_kind: SourceKind
    instrument_id: str
    value: float

    def __post_init__(self):
        object.__setattr__(self, "timestamp", normalize_timestamp(self.timestamp))
        check_token(self.source_id, "source id")
        check_token(self.instrument_id, "instrument id")
        if not isinstance(self.source_kind, SourceKind):
            raise ValueError(f"source_kind must be a SourceKind, got {self.source_kind!r}")
        object.__setattr__(self, "value", _require_finite(self.value, "observation value"))


@dataclass(frozen=True)
class NewsDocument:
    timestamp: datetime
    source_kind: SourceKind
    headline: str
    body: str = ""
    instrument_ids: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "timestamp", normalize_timestamp(self.timestamp))
        if not isinstance(self.source_kind, SourceKind):
            raise ValueError(f"source_kind must be a SourceKind, got {self.source_kind!r}")
        if not self.headline or not self.headline.strip():
            raise ValueError("headline must be non-empty")
        ids = tuple(check_token(i, "instrument id") for i in self.instrument_ids)
        object.__setattr__(self, "instrument_ids", ids)


class SeriesStore:
    """Append-only store of bars, source observations and news.

    Appends are idempotent for byte-identical records; a record at an
    existing key with a different value raises ConflictingDuplicate.
    Readers get timestamp-ordered results; `snapshot()` hands out an
    independent copy safe to share across threads.
    """

    def __init__(self):
        self._instruments: dict[str, Instrument] = {}
        self._bars: dict[str, list[Bar]] = {}
        self._bar_keys: dict[str, list[datetime]] = {}
        self._observations: dict[str, list[SourceObservation]] = {}
        self._obs_keys: dict[str, list[tuple[datetime, str]]] = {}
        self._news: list[NewsDocument] = []
        self._news_keys: list[tuple[datetime, int]] = []
        self._news_seen: set[tuple] = set()

    # --- registration ----------------------------------------------------

    def register_instrument(self, instrument: Instrument) -> None:
        existing = self._instruments.get(instrument.id)
        if existing is not None:
            if existing != instrument:
                raise ConflictingDuplicate(
                    f"instrument {instrument.id!r} already registered with different attributes"
                )
            return
        self._instruments[instrument.id] = instrument
        self._bars[instrument.id] = []
        self._bar_keys[instrument.id] = []

    def instrument(self, instrument_id: str) -> Instrument:
        try:
            return self._instruments[instrument_id]
        except KeyError:
            raise UnknownInstrument(f"instrument {instrument_id!r} is not registered") from None

    @property
    def instrument_ids(self) -> list[str]:
        return sorted(self._instruments)

    @property
    def source_ids(self) -> list[str]:
        return sorted(self._observations)

    # --- appends -----------------------------------------------------------

    def append_bar(self, bar: Bar) -> None:
        if bar.instrument_id not in self._instruments:
            raise UnknownInstrument(f"instrument {bar.instrument_id!r} is not registered")
        keys = self._bar_keys[bar.instrument_id]
        rows = self._bars[bar.instrument_id]
        pos = bisect.bisect_left(keys, bar.timestamp)
        if pos < len(keys) and keys[pos] == bar.timestamp:
            if rows[pos].close == bar.close:
                return  # identical re-append is a no-op
            raise ConflictingDuplicate(
                f"bar for {bar.instrument_id!r} at {format_timestamp(bar.timestamp)} "
                f"already stored with close {rows[pos].close}, got {bar.close}"
            )
        keys.insert(pos, bar.timestamp)
        rows.insert(pos, bar)

    def append_observation(self, obs: SourceObservation) -> None:
        keys = self._obs_keys.setdefault(obs.source_id, [])
        rows = self._observations.setdefault(obs.source_id, [])
        key = (obs.timestamp, obs.instrument_id)
        pos = bisect.bisect_left(keys, key)
        if pos < len(keys) and keys[pos] == key:
            if rows[pos].value == obs.value and rows[pos].source_kind == obs.source_kind:
                return
            raise ConflictingDuplicate(
                f"observation {obs.source_id!r}/{obs.instrument_id!r} at "
                f"{format_timestamp(obs.timestamp)} conflicts with stored value"
            )
        keys.insert(pos, key)
        rows.insert(pos, obs)

    def append_news(self, doc: NewsDocument) -> None:
        identity = (doc.timestamp, doc.source_kind.value, doc.headline, doc.body, doc.instrument_ids)
        if identity in self._news_seen:
            return
        # stable tie-break: arrival order among equal timestamps
        key = (doc.timestamp, len(self._news_keys))
        pos = bisect.bisect_left(self._news_keys, key)
        self._news_keys.insert(pos, key)
        self._news.insert(pos, doc)
        self._news_seen.add(identity)

    # --- queries -----------------------------------------------------------

    def query_bars(self, instrument_id: str, start: datetime, end: datetime) -> list[Bar]:
        """Bars for one instrument in the half-open interval [start, end)."""
        if instrument_id not in self._instruments:
            raise UnknownInstrument(f"instrument {instrument_id!r} is not registered")
        keys = self._bar_keys[instrument_id]
        lo = bisect.bisect_left(keys, normalize_timestamp(start))
        hi = bisect.bisect_left(keys, normalize_timestamp(end))
        return self._bars[instrument_id][lo:hi]

    def query_window(self, instrument_id: str, end: datetime, length: int) -> list[Bar]:
        """The most recent `length` bars with timestamp <= end, oldest first.

        Short history returns fewer bars and never errors.
        """
        if length < 1:
            raise ValueError("window length must be >= 1")
        if instrument_id not in self._instruments:
            raise UnknownInstrument(f"instrument {instrument_id!r} is not registered")
        keys = self._bar_keys[instrument_id]
        hi = bisect.bisect_right(keys, normalize_timestamp(end))
        lo = max(0, hi - length)
        return self._bars[instrument_id][lo:hi]

    def query_observations(
        self,
        source_id: str,
        start: Optional[datetime] = None,
        end: Optional[datetime] = None,
        instrument_id: Optional[str] = None,
    ) -> list[SourceObservation]:
        """Observations for one source, timestamp-ordered, in [start, end)."""
        rows = self._observations.get(source_id, [])
        keys = self._obs_keys.get(source_id, [])
        lo = bisect.bisect_left(keys, (normalize_timestamp(start), "")) if start else 0
        hi = bisect.bisect_left(keys, (normalize_timestamp(end), "")) if end else len(rows)
        out = rows[lo:hi]
        if instrument_id is not None:
            out = [obs for obs in out if obs.instrument_id == instrument_id]
        return out

    def query_news(self, start: datetime, end: datetime) -> list[NewsDocument]:
        """News documents in [start, end), timestamp-ordered."""
        start = normalize_timestamp(start)
        end = normalize_timestamp(end)
        return [d for d in self._news if start <= d.timestamp < end]

    def counts(self) -> dict[str, int]:
        return {
            "bars": sum(len(v) for v in self._bars.values()),
            "observations": sum(len(v) for v in self._observations.values()),
            "news": len(self._news),
        }

    def snapshot(self) -> "SeriesStore":
        """Independent copy for readers; records themselves are immutable."""
        snap = SeriesStore()
        snap._instruments = dict(self._instruments)
        snap._bars = {k: list(v) for k, v in self._bars.items()}
        snap._bar_keys = {k: list(v) for k, v in self._bar_keys.items()}
        snap._observations = {k: list(v) for k, v in self._observations.items()}
        snap._obs_keys = {k: list(v) for k, v in self._obs_keys.items()}
        snap._news = list(self._news)
        snap._news_keys = list(self._news_keys)
        snap._news_seen = set(self._news_seen)
        return snap


# --- record codecs ----------------------------------------------------------

def bar_to_row(bar: Bar, asset_class: AssetClass) -> list[str]:
    return [format_timestamp(bar.timestamp), bar.instrument_id, asset_class.value, repr(bar.close)]


def bar_from_row(row: Sequence[str]) -> tuple[Bar, AssetClass]:
    if len(row) != len(BAR_HEADER):
        raise ValueError(f"expected {len(BAR_HEADER)} fields, got {len(row)}")
    ts, instrument_id, asset_class, close = row
    return (
        Bar(timestamp=parse_timestamp(ts), instrument_id=instrument_id.strip(), close=float(close)),
        AssetClass(asset_class.strip()),
    )


def observation_to_row(obs: SourceObservation) -> list[str]:
    return [
        format_timestamp(obs.timestamp),
        obs.source_id,
        obs.source_kind.value,
        obs.instrument_id,
        repr(obs.value),
    ]


def observation_from_row(row: Sequence[str]) -> SourceObservation:
    if len(row) != len(OBSERVATION_HEADER):
        raise ValueError(f"expected {len(OBSERVATION_HEADER)} fields, got {len(row)}")
    ts, source_id, kind, instrument_id, value = row
    return SourceObservation(
        timestamp=parse_timestamp(ts),
        source_id=source_id.strip(),
        source_kind=SourceKind(kind.strip()),
        instrument_id=instrument_id.strip(),
        value=float(value),
    )


def news_to_json(doc: NewsDocument) -> str:
    return json.dumps(
        {
            "timestamp": format_timestamp(doc.timestamp),
            "source_kind": doc.source_kind.value,
            "headline": doc.headline,
            "body": doc.body,
            "instrument_ids": list(doc.instrument_ids),
        },
        sort_keys=True,
    )


def news_from_json(line: str) -> NewsDocument:
    payload = json.loads(line)
    if not isinstance(payload, dict):
        raise ValueError("news line must be a JSON object")
    unknown = set(payload) - NEWS_KEYS
    if unknown:
        raise ValueError(f"unknown news keys: {sorted(unknown)}")
    ids = payload.get("instrument_ids", [])
    if not isinstance(ids, list):
        raise ValueError("instrument_ids must be a list")
    return NewsDocument(
        timestamp=parse_timestamp(payload["timestamp"]),
        source_kind=SourceKind(payload["source_kind"]),
        headline=payload["headline"],
        body=payload.get("body", ""),
        instrument_ids=tuple(ids),
    )


# --- file writers (readers with reject tracking live in ingest) -------------

def write_bars_csv(path, bars: Iterable[Bar], asset_classes: dict[str, AssetClass]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(BAR_HEADER)
        for bar in bars:
            writer.writerow(bar_to_row(bar, asset_classes[bar.instrument_id]))


def write_observations_csv(path, observations: Iterable[SourceObservation]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(OBSERVATION_HEADER)
        for obs in observations:
            writer.writerow(observation_to_row(obs))


def write_news_jsonl(path, documents: Iterable[NewsDocument]) -> None:
    with open(path, "w") as fh:
        for doc in documents:
            fh.write(news_to_json(doc) + "\n")


def resolve_path(path) -> Path:
    return Path(path).expanduser()
