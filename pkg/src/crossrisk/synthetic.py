"""Seeded synthetic market generator.

Produces a desk-scale stand-in for two years of daily market data
(default 504 bars) across the three asset classes: correlated log-return
paths per instrument, per-source observation streams (including planted
"oracle" sources whose values equal the next day's return), and
scheduled news documents composed from the shipped sentiment lexicons so
their polarity is known exactly. Everything derives from one integer
seed; identical specs write byte-identical files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import InvalidSpec
from .model import (
    AssetClass,
    Bar,
    Instrument,
    NewsDocument,
    SeriesStore,
    SourceKind,
    SourceObservation,
    parse_timestamp,
    write_bars_csv,
    write_news_jsonl,
    write_observations_csv,
)
from .textinsight import NEGATIVE_WORDS, POSITIVE_WORDS

DEFAULT_DAYS = 504  # ~2 trading years
DEFAULT_START = "2022-01-03T00:00:00Z"

SOURCE_MODES = ("next_return", "noise")
POLARITIES = ("positive", "negative", "neutral")

_NEUTRAL_WORDS = (
    "markets", "session", "trading", "volumes", "levels", "ranges",
    "midday", "benchmarks", "screens", "desks", "tickers", "closes",
)


@dataclass(frozen=True)
class SyntheticInstrumentSpec:
    id: str
    asset_class: AssetClass
    drift: float = 0.0
    vol: float = 0.01
    start_price: float = 100.0


@dataclass(frozen=True)
class SyntheticSourceSpec:
    source_id: str
    source_kind: SourceKind
    mode: str = "noise"


@dataclass(frozen=True)
class NewsEventSpec:
    """A scheduled news burst, optionally paired with a return shock."""

    day: int
    polarity: str = "neutral"
    count: int = 1
    instrument_ids: tuple[str, ...] = ()
    shock: float = 0.0


@dataclass(frozen=True)
class SyntheticMarketSpec:
    seed: int
    instruments: tuple[SyntheticInstrumentSpec, ...]
    days: int = DEFAULT_DAYS
    start: str = DEFAULT_START
    correlation: float = 0.0
    sources: tuple[SyntheticSourceSpec, ...] = ()
    news: tuple[NewsEventSpec, ...] = ()
    background_news_every: int = 0
    background_news_polarity: str = "neutral"

    def __post_init__(self):
        if self.days < 2:
            raise InvalidSpec(f"days must be >= 2, got {self.days}")
        if not self.instruments:
            raise InvalidSpec("at least one instrument is required")
        ids = [i.id for i in self.instruments]
        if len(set(ids)) != len(ids):
            raise InvalidSpec("instrument ids must be unique")
        k = len(self.instruments)
        lower = -1.0 / (k - 1) if k > 1 else -1.0
        if not (lower < self.correlation <= 1.0):
            raise InvalidSpec(
                f"correlation {self.correlation} infeasible for {k} instruments"
            )
        for inst in self.instruments:
            if inst.vol < 0 or not math.isfinite(inst.vol):
                raise InvalidSpec(f"{inst.id}: vol must be >= 0")
            if inst.start_price <= 0:
                raise InvalidSpec(f"{inst.id}: start_price must be > 0")
            if not math.isfinite(inst.drift):
                raise InvalidSpec(f"{inst.id}: drift must be finite")
        source_ids = [s.source_id for s in self.sources]
        if len(set(source_ids)) != len(source_ids):
            raise InvalidSpec("source ids must be unique")
        for src in self.sources:
            if src.mode not in SOURCE_MODES:
                raise InvalidSpec(f"{src.source_id}: unknown mode {src.mode!r}")
        for event in self.news:
            if not (0 <= event.day < self.days):
                raise InvalidSpec(f"news day {event.day} outside [0, {self.days})")
            if event.polarity not in POLARITIES:
                raise InvalidSpec(f"unknown polarity {event.polarity!r}")
            if event.count < 1:
                raise InvalidSpec("news count must be >= 1")
            if not math.isfinite(event.shock):
                raise InvalidSpec("shock must be finite")
            unknown = set(event.instrument_ids) - set(ids)
            if unknown:
                raise InvalidSpec(f"news references unknown instruments: {sorted(unknown)}")
        if self.background_news_every < 0:
            raise InvalidSpec("background_news_every must be >= 0")
        if self.background_news_polarity not in POLARITIES:
            raise InvalidSpec(f"unknown polarity {self.background_news_polarity!r}")
        try:
            parse_timestamp(self.start)
        except ValueError as exc:
            raise InvalidSpec(str(exc)) from None


@dataclass
class MarketData:
    instruments: list[Instrument]
    bars: list[Bar]
    observations: list[SourceObservation]
    news: list[NewsDocument]
    source_kinds: dict[str, SourceKind]

    @property
    def asset_classes(self) -> dict[str, AssetClass]:
        return {i.id: i.asset_class for i in self.instruments}


def _day_stamps(start: datetime, days: int) -> list[datetime]:
    return [start + timedelta(days=d) for d in range(days)]


def _returns_matrix(spec: SyntheticMarketSpec, rng: np.random.Generator) -> np.ndarray:
    """Daily log returns, shape (days-1, k); row d is the return into day d+1."""
    k = len(spec.instruments)
    corr = np.full((k, k), spec.correlation)
    np.fill_diagonal(corr, 1.0)
    chol = np.linalg.cholesky(corr)
    shocks = rng.standard_normal((spec.days - 1, k)) @ chol.T
    drift = np.array([i.drift for i in spec.instruments])
    vol = np.array([i.vol for i in spec.instruments])
    returns = drift + vol * shocks
    index = {inst.id: j for j, inst in enumerate(spec.instruments)}
    for event in spec.news:
        if event.shock == 0.0 or event.day == 0:
            continue
        targets = event.instrument_ids or tuple(index)
        for inst_id in targets:
            returns[event.day - 1, index[inst_id]] += event.shock
    return returns


def _compose_text(polarity: str, rng: np.random.Generator, with_tags: bool) -> tuple[str, str]:
    if polarity == "positive":
        vocab = sorted(POSITIVE_WORDS)
    elif polarity == "negative":
        vocab = sorted(NEGATIVE_WORDS)
    else:
        vocab = list(_NEUTRAL_WORDS)
    words = [vocab[int(rng.integers(len(vocab)))] for _ in range(6)]
    headline = " ".join(words[:3])
    body = " ".join(words[3:])
    if with_tags and polarity == "negative":
        body += " volatility spreads across credit desks"
    return headline, body


def generate_market_data(spec: SyntheticMarketSpec) -> MarketData:
    """Generate the full record set for a spec, in memory."""
    rng = np.random.default_rng(spec.seed)
    start = parse_timestamp(spec.start)
    stamps = _day_stamps(start, spec.days)
    returns = _returns_matrix(spec, rng)

    instruments = [
        Instrument(id=i.id, asset_class=i.asset_class) for i in spec.instruments
    ]
    bars: list[Bar] = []
    closes = {i.id: [float(i.start_price)] for i in spec.instruments}
    for j, inst in enumerate(spec.instruments):
        series = closes[inst.id]
        for d in range(1, spec.days):
            series.append(series[-1] * math.exp(float(returns[d - 1, j])))
    for d, stamp in enumerate(stamps):
        for inst in spec.instruments:
            bars.append(Bar(timestamp=stamp, instrument_id=inst.id, close=closes[inst.id][d]))

    observations: list[SourceObservation] = []
    for source in spec.sources:
        if source.mode == "noise":
            noise = rng.standard_normal((spec.days, len(spec.instruments)))
        for d, stamp in enumerate(stamps):
            for j, inst in enumerate(spec.instruments):
                if source.mode == "next_return":
                    if d >= spec.days - 1:
                        continue
                    value = float(returns[d, j])
                else:
                    value = float(noise[d, j])
                observations.append(
                    SourceObservation(
                        timestamp=stamp,
                        source_id=source.source_id,
                        source_kind=source.source_kind,
                        instrument_id=inst.id,
                        value=value,
                    )
                )

    news: list[NewsDocument] = []
    for event in spec.news:
        for _ in range(event.count):
            headline, body = _compose_text(event.polarity, rng, with_tags=True)
            news.append(
                NewsDocument(
                    timestamp=stamps[event.day],
                    source_kind=SourceKind.MARKET_NEWS,
                    headline=headline,
                    body=body,
                    instrument_ids=event.instrument_ids,
                )
            )
    if spec.background_news_every:
        for d in range(1, spec.days):
            if d % spec.background_news_every == 0:
                headline, body = _compose_text(spec.background_news_polarity, rng, with_tags=False)
                news.append(
                    NewsDocument(
                        timestamp=stamps[d],
                        source_kind=SourceKind.MARKET_NEWS,
                        headline=headline,
                        body=body,
                    )
                )
    news.sort(key=lambda d: d.timestamp)

    return MarketData(
        instruments=instruments,
        bars=bars,
        observations=observations,
        news=news,
        source_kinds={s.source_id: s.source_kind for s in spec.sources},
    )


def build_store(spec: SyntheticMarketSpec) -> tuple[SeriesStore, dict[str, SourceKind]]:
    """Generate a spec directly into a fresh in-memory store."""
    data = generate_market_data(spec)
    store = SeriesStore()
    for instrument in data.instruments:
        store.register_instrument(instrument)
    for bar in data.bars:
        store.append_bar(bar)
    for obs in data.observations:
        store.append_observation(obs)
    for doc in data.news:
        store.append_news(doc)
    return store, data.source_kinds


def generate_synthetic_market(spec: SyntheticMarketSpec, out_dir) -> dict[str, Path]:
    """Write the generated records as flat files under out_dir.

    Returns the paths for the bar CSV, observation CSV and news JSONL.
    Reruns with the same spec produce byte-identical files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    data = generate_market_data(spec)
    paths = {
        "bars": out / "bars.csv",
        "observations": out / "observations.csv",
        "news": out / "news.jsonl",
    }
    write_bars_csv(paths["bars"], data.bars, data.asset_classes)
    write_observations_csv(paths["observations"], data.observations)
    write_news_jsonl(paths["news"], data.news)
    return paths


# --- JSON (scenario-file) codec ----------------------------------------------

def spec_from_dict(payload: Mapping, default_seed: int = 0) -> SyntheticMarketSpec:
    try:
        instruments = tuple(
            SyntheticInstrumentSpec(
                id=i["id"],
                asset_class=AssetClass(i["asset_class"]),
                drift=float(i.get("drift", 0.0)),
                vol=float(i.get("vol", 0.01)),
                start_price=float(i.get("start_price", 100.0)),
            )
            for i in payload["instruments"]
        )
        sources = tuple(
            SyntheticSourceSpec(
                source_id=s["id"],
                source_kind=SourceKind(s["kind"]),
                mode=s.get("mode", "noise"),
            )
            for s in payload.get("sources", ())
        )
        news = tuple(
            NewsEventSpec(
                day=int(e["day"]),
                polarity=e.get("polarity", "neutral"),
                count=int(e.get("count", 1)),
                instrument_ids=tuple(e.get("instruments", ())),
                shock=float(e.get("shock", 0.0)),
            )
            for e in payload.get("news", ())
        )
        return SyntheticMarketSpec(
            seed=int(payload.get("seed", default_seed)),
            days=int(payload.get("days", DEFAULT_DAYS)),
            start=payload.get("start", DEFAULT_START),
            correlation=float(payload.get("correlation", 0.0)),
            instruments=instruments,
            sources=sources,
            news=news,
            background_news_every=int(payload.get("background_news_every", 0)),
            background_news_polarity=payload.get("background_news_polarity", "neutral"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidSpec(f"bad market spec: {exc}") from exc
