"""File ingestion and deterministic event replay.

Heterogeneous inputs (bar CSVs, observation CSVs, news JSONL) are
normalized into store records. Malformed lines never crash a load: they
are collected into a rejects report with file and line number, and a
file only fails outright when more than 10% of its data lines are bad.

Replay turns the store back into a single time-ordered event stream:
events are emitted in non-decreasing timestamp order with deterministic
tie-breaks (bars before observations before news, then lexicographic
ids), so identical inputs always produce byte-identical sequences.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

from .errors import FileUnreadable, MalformedHeader, RejectRateExceeded
from .model import (
    BAR_HEADER,
    OBSERVATION_HEADER,
    Bar,
    Instrument,
    NewsDocument,
    SeriesStore,
    SourceKind,
    SourceObservation,
    bar_from_row,
    format_timestamp,
    news_from_json,
    news_to_json,
    observation_from_row,
)

REJECT_RATE_LIMIT = 0.10


class IntegrationMethod(Enum):
    REAL_TIME_PARSING = "real_time_parsing"
    AUTOMATED_SUMMARIZATION = "automated_summarization"
    TIME_SERIES_ANALYSIS = "time_series_analysis"
    CORRELATION_ANALYSIS = "correlation_analysis"
    SENTIMENT_ANALYSIS = "sentiment_analysis"
    DYNAMIC_SENTIMENT_UPDATES = "dynamic_sentiment_updates"


# Default method per source kind (the canonical pairing).
DEFAULT_METHOD: dict[SourceKind, IntegrationMethod] = {
    SourceKind.MARKET_NEWS: IntegrationMethod.REAL_TIME_PARSING,
    SourceKind.FINANCIAL_REPORTS: IntegrationMethod.AUTOMATED_SUMMARIZATION,
    SourceKind.HISTORICAL_DATA: IntegrationMethod.TIME_SERIES_ANALYSIS,
    SourceKind.ECONOMIC_INDICATORS: IntegrationMethod.CORRELATION_ANALYSIS,
    SourceKind.ANALYST_REPORTS: IntegrationMethod.SENTIMENT_ANALYSIS,
    SourceKind.INVESTOR_FEEDBACK: IntegrationMethod.DYNAMIC_SENTIMENT_UPDATES,
}


@dataclass(frozen=True)
class SourceAdapterConfig:
    source_id: str
    source_kind: SourceKind
    file_path: Union[str, Path]
    integration_method: Optional[IntegrationMethod] = None
    allow_method_mismatch: bool = False

    def __post_init__(self):
        method = self.integration_method
        if method is None:
            method = DEFAULT_METHOD[self.source_kind]
            object.__setattr__(self, "integration_method", method)
        elif method != DEFAULT_METHOD[self.source_kind] and not self.allow_method_mismatch:
            raise ValueError(
                f"integration method {method.value!r} does not match kind "
                f"{self.source_kind.value!r}; pass allow_method_mismatch=True to override"
            )


@dataclass(frozen=True)
class RejectRecord:
    file: str
    line_number: int
    reason: str


@dataclass
class LoadResult:
    store: SeriesStore
    rejects: list[RejectRecord] = field(default_factory=list)
    loaded: int = 0

    def rejects_for(self, path) -> list[RejectRecord]:
        return [r for r in self.rejects if r.file == str(path)]


def _read_lines(path: Path) -> list[str]:
    try:
        return path.read_text().splitlines()
    except OSError as exc:
        raise FileUnreadable(f"cannot read {path}: {exc}") from exc


def _sniff_format(path: Path, lines: list[str]) -> str:
    """Classify a file as 'bars', 'observations' or 'news' by its first line."""
    if path.suffix.lower() in {".jsonl", ".ndjson"}:
        return "news"
    first = next((ln for ln in lines if ln.strip()), "")
    if first.lstrip().startswith("{"):
        return "news"
    header = [h.strip() for h in first.split(",")]
    if header == BAR_HEADER:
        return "bars"
    if header == OBSERVATION_HEADER:
        return "observations"
    raise MalformedHeader(f"{path}: unrecognized header {first!r}")


def _check_reject_rate(path: Path, rejected: int, total: int) -> None:
    if total and rejected / total > REJECT_RATE_LIMIT:
        raise RejectRateExceeded(
            f"{path}: {rejected} of {total} lines rejected "
            f"(limit {REJECT_RATE_LIMIT:.0%})"
        )


def load_bars_file(path, store: SeriesStore) -> tuple[int, list[RejectRecord]]:
    """Load a bar CSV, auto-registering instruments from the asset_class column."""
    path = Path(path)
    lines = _read_lines(path)
    if _sniff_format(path, lines) != "bars":
        raise MalformedHeader(f"{path}: expected bar header {','.join(BAR_HEADER)}")
    rejects: list[RejectRecord] = []
    loaded = 0
    data_lines = 0
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        data_lines += 1
        try:
            row = next(csv.reader([line]))
            bar, asset_class = bar_from_row(row)
            store.register_instrument(Instrument(id=bar.instrument_id, asset_class=asset_class))
            store.append_bar(bar)
            loaded += 1
        except Exception as exc:
            rejects.append(RejectRecord(file=str(path), line_number=lineno, reason=str(exc)))
    _check_reject_rate(path, len(rejects), data_lines)
    return loaded, rejects


def load_observations_file(
    path, store: SeriesStore, expected: Optional[SourceAdapterConfig] = None
) -> tuple[int, list[RejectRecord]]:
    path = Path(path)
    lines = _read_lines(path)
    if _sniff_format(path, lines) != "observations":
        raise MalformedHeader(f"{path}: expected observation header {','.join(OBSERVATION_HEADER)}")
    rejects: list[RejectRecord] = []
    loaded = 0
    data_lines = 0
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        data_lines += 1
        try:
            row = next(csv.reader([line]))
            obs = observation_from_row(row)
            if (
                expected is not None
                and obs.source_id == expected.source_id
                and obs.source_kind != expected.source_kind
            ):
                raise ValueError(
                    f"source_kind {obs.source_kind.value!r} does not match adapter "
                    f"kind {expected.source_kind.value!r}"
                )
            store.append_observation(obs)
            loaded += 1
        except Exception as exc:
            rejects.append(RejectRecord(file=str(path), line_number=lineno, reason=str(exc)))
    _check_reject_rate(path, len(rejects), data_lines)
    return loaded, rejects


def load_news_file(path, store: SeriesStore) -> tuple[int, list[RejectRecord]]:
    path = Path(path)
    lines = _read_lines(path)
    rejects: list[RejectRecord] = []
    loaded = 0
    data_lines = 0
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        data_lines += 1
        try:
            store.append_news(news_from_json(line))
            loaded += 1
        except Exception as exc:
            rejects.append(RejectRecord(file=str(path), line_number=lineno, reason=str(exc)))
    _check_reject_rate(path, len(rejects), data_lines)
    return loaded, rejects


def load_sources(
    configs: Sequence[SourceAdapterConfig],
    bar_paths: Sequence = (),
    news_paths: Sequence = (),
    store: Optional[SeriesStore] = None,
) -> LoadResult:
    """Load every configured file into one store.

    Bar files are loaded first so instruments exist before observations
    reference them. Each adapter's file format is sniffed from its
    header, so an adapter may point at bar, observation or news data.
    """
    result = LoadResult(store=store if store is not None else SeriesStore())
    seen: set[Path] = set()
    for path in bar_paths:
        path = Path(path).resolve()
        if path in seen:
            continue
        seen.add(path)
        loaded, rejects = load_bars_file(path, result.store)
        result.loaded += loaded
        result.rejects.extend(rejects)
    pending: list[tuple[str, SourceAdapterConfig, Path]] = []
    for config in configs:
        path = Path(config.file_path).resolve()
        if path in seen:
            continue  # several adapters may share one multi-source file
        seen.add(path)
        pending.append((_sniff_format(path, _read_lines(path)), config, path))
    # bars before observations/news regardless of adapter order
    pending.sort(key=lambda item: 0 if item[0] == "bars" else 1)
    for kind, config, path in pending:
        if kind == "bars":
            loaded, rejects = load_bars_file(path, result.store)
        elif kind == "observations":
            loaded, rejects = load_observations_file(path, result.store, expected=config)
        else:
            loaded, rejects = load_news_file(path, result.store)
        result.loaded += loaded
        result.rejects.extend(rejects)
    for path in news_paths:
        path = Path(path).resolve()
        if path in seen:
            continue
        seen.add(path)
        loaded, rejects = load_news_file(path, result.store)
        result.loaded += loaded
        result.rejects.extend(rejects)
    return result


# --- replay -------------------------------------------------------------------

_PAYLOAD_RANK = {Bar: 0, SourceObservation: 1, NewsDocument: 2}


@dataclass(frozen=True)
class IngestEvent:
    timestamp: datetime
    payload: Union[Bar, SourceObservation, NewsDocument]

    @property
    def kind(self) -> str:
        return {Bar: "bar", SourceObservation: "observation", NewsDocument: "news"}[
            type(self.payload)
        ]

    def sort_key(self):
        p = self.payload
        if isinstance(p, Bar):
            ids: tuple[str, ...] = (p.instrument_id,)
        elif isinstance(p, SourceObservation):
            ids = (p.source_id, p.instrument_id)
        else:
            ids = tuple(p.instrument_ids) + (p.headline,)
        return (self.timestamp, _PAYLOAD_RANK[type(p)], ids)


def event_to_json(event: IngestEvent) -> str:
    p = event.payload
    if isinstance(p, Bar):
        payload = {
            "timestamp": format_timestamp(p.timestamp),
            "instrument_id": p.instrument_id,
            "close": p.close,
        }
    elif isinstance(p, SourceObservation):
        payload = {
            "timestamp": format_timestamp(p.timestamp),
            "source_id": p.source_id,
            "source_kind": p.source_kind.value,
            "instrument_id": p.instrument_id,
            "value": p.value,
        }
    else:
        payload = json.loads(news_to_json(p))
    return json.dumps({"kind": event.kind, "payload": payload}, sort_keys=True)


def collect_events(store: SeriesStore, start: datetime, end: datetime) -> list[IngestEvent]:
    """All store records in [start, end) in deterministic replay order."""
    events: list[IngestEvent] = []
    for instrument_id in store.instrument_ids:
        for bar in store.query_bars(instrument_id, start, end):
            events.append(IngestEvent(timestamp=bar.timestamp, payload=bar))
    for source_id in store.source_ids:
        for obs in store.query_observations(source_id, start=start, end=end):
            events.append(IngestEvent(timestamp=obs.timestamp, payload=obs))
    for doc in store.query_news(start, end):
        events.append(IngestEvent(timestamp=doc.timestamp, payload=doc))
    events.sort(key=IngestEvent.sort_key)
    return events


def replay(
    store: SeriesStore,
    start: datetime,
    end: datetime,
    sink: Callable[[IngestEvent], None],
) -> int:
    """Deliver every event in [start, end) exactly once, in order.

    The sink is called sequentially; the count of delivered events is
    returned. Replay is a pure function of (store contents, interval).
    """
    if start > end:
        raise ValueError("replay interval must satisfy start <= end")
    events = collect_events(store, start, end)
    for event in events:
        sink(event)
    return len(events)
