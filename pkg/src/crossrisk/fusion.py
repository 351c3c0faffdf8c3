"""Weighted fusion of data sources and the online weight learner.

Each configured source gets a weight on the probability simplex; the
fused value for an instrument at a tick is the weight-renormalized mean
over sources that actually reported. Weights start from per-kind
efficiency priors and adapt online with a multiplicative-weights update
driven by a per-source relevance score (absolute correlation between a
source's observations and next-period absolute returns). A floor keeps
every source alive so a silent or unlucky source can recover.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from . import kernels
from .errors import (
    DuplicateKind,
    EmptySourceSet,
    InsufficientHistory,
    KeyMismatch,
    NonPositiveLearningRate,
    NoObservations,
    UnknownSource,
)
from .model import SeriesStore, SourceKind

DEFAULT_WEIGHT_FLOOR = 0.01
SIMPLEX_TOLERANCE = 1e-9

# Per-kind integration efficiency priors (source taxonomy table).
EFFICIENCY_SCORES: dict[SourceKind, float] = {
    SourceKind.MARKET_NEWS: 0.85,
    SourceKind.FINANCIAL_REPORTS: 0.78,
    SourceKind.HISTORICAL_DATA: 0.82,
    SourceKind.ECONOMIC_INDICATORS: 0.80,
    SourceKind.ANALYST_REPORTS: 0.77,
    SourceKind.INVESTOR_FEEDBACK: 0.83,
}


@dataclass(frozen=True)
class IntegrationWeights:
    """Per-source weights on the floored probability simplex."""

    weights: Mapping[str, float]
    floor: float = DEFAULT_WEIGHT_FLOOR

    def __post_init__(self):
        if not self.weights:
            raise EmptySourceSet("weights must cover at least one source")
        n = len(self.weights)
        if not (0.0 < self.floor <= 1.0 / n):
            raise ValueError(f"floor must lie in (0, 1/{n}], got {self.floor!r}")
        total = 0.0
        for key, value in self.weights.items():
            if not math.isfinite(value) or value < self.floor - SIMPLEX_TOLERANCE:
                raise ValueError(f"weight for {key!r} must be >= floor {self.floor}, got {value!r}")
            total += value
        if abs(total - 1.0) > SIMPLEX_TOLERANCE:
            raise ValueError(f"weights must sum to 1, got {total!r}")

    def as_sorted_items(self) -> list[tuple[str, float]]:
        return sorted(self.weights.items())


@dataclass(frozen=True)
class IntegratedSnapshot:
    """Weighted fusion of one instrument's source values at one instant."""

    timestamp: datetime
    instrument_id: str
    value: float
    contributing_sources: frozenset[str]


def _floored_simplex(raw: Mapping[str, float], floor: float) -> dict[str, float]:
    """Project positive raw masses onto the simplex with a per-entry floor.

    Entries that would fall below the floor are pinned there; the rest of
    the mass is distributed proportionally. Feasible whenever
    floor <= 1/len(raw).
    """
    pinned: set[str] = set()
    while True:
        budget = 1.0 - floor * len(pinned)
        free_total = sum(v for k, v in raw.items() if k not in pinned)
        scaled = {
            k: (floor if k in pinned else raw[k] * budget / free_total)
            for k in raw
        }
        low = [k for k, v in scaled.items() if k not in pinned and v < floor]
        if not low:
            return scaled
        pinned.update(low)
        if len(pinned) == len(raw):
            return {k: 1.0 / len(raw) for k in raw}


def initial_weights(
    source_kinds: Union[Sequence[SourceKind], Mapping[str, SourceKind]],
    floor: float = DEFAULT_WEIGHT_FLOOR,
) -> IntegrationWeights:
    """Prior weights proportional to per-kind efficiency scores.

    Accepts either a sequence of distinct kinds (weights keyed by the
    kind's serialized name) or a mapping of source_id -> kind (weights
    keyed by source_id; kinds may repeat).
    """
    if isinstance(source_kinds, Mapping):
        scores = {sid: EFFICIENCY_SCORES[kind] for sid, kind in source_kinds.items()}
    else:
        kinds = list(source_kinds)
        if len(set(kinds)) != len(kinds):
            raise DuplicateKind("source kinds must be distinct")
        scores = {kind.value: EFFICIENCY_SCORES[kind] for kind in kinds}
    if not scores:
        raise EmptySourceSet("at least one source kind is required")
    total = sum(scores.values())
    raw = {key: score / total for key, score in scores.items()}
    return IntegrationWeights(weights=_floored_simplex(raw, floor), floor=floor)


def integrate(
    values: Mapping[str, float],
    w: IntegrationWeights,
    timestamp: datetime,
    instrument_id: str,
) -> IntegratedSnapshot:
    """Fuse one instrument's per-source values into a single snapshot.

    Weights are renormalized over the sources present this tick, so the
    result is a convex combination of the reported values; sources that
    did not report contribute nothing.
    """
    if not values:
        raise NoObservations(f"no observations for {instrument_id!r} at {timestamp}")
    unknown = set(values) - set(w.weights)
    if unknown:
        raise UnknownSource(f"observations from unconfigured sources: {sorted(unknown)}")
    ids = sorted(values)
    if len(ids) == 1:
        fused = float(values[ids[0]])  # renormalization identity, exact
    else:
        fused = kernels.weighted_mean(
            np.asarray([values[i] for i in ids], dtype=np.float64),
            np.asarray([w.weights[i] for i in ids], dtype=np.float64),
        )
    return IntegratedSnapshot(
        timestamp=timestamp,
        instrument_id=instrument_id,
        value=fused,
        contributing_sources=frozenset(ids),
    )


def update_weights(
    w: IntegrationWeights,
    relevance: Mapping[str, float],
    learning_rate: float,
) -> IntegrationWeights:
    """Multiplicative-weights update toward more relevant sources.

    w_i <- w_i * exp(learning_rate * (relevance_i - mean relevance)),
    then floor and renormalize. Uniform relevance is a fixed point.
    """
    if learning_rate <= 0.0 or not math.isfinite(learning_rate):
        raise NonPositiveLearningRate(f"learning rate must be > 0, got {learning_rate!r}")
    if set(relevance) != set(w.weights):
        raise KeyMismatch("relevance keys do not match weight keys")
    for key, value in relevance.items():
        if not (0.0 <= value <= 1.0):
            raise ValueError(f"relevance for {key!r} must lie in [0, 1], got {value!r}")
    mean_rel = sum(relevance.values()) / len(relevance)
    raw = {
        key: w.weights[key] * math.exp(learning_rate * (relevance[key] - mean_rel))
        for key in w.weights
    }
    return IntegrationWeights(weights=_floored_simplex(raw, w.floor), floor=w.floor)


def relevance_from_history(
    store: SeriesStore,
    source_id: str,
    window: int,
    end: Optional[datetime] = None,
    start: Optional[datetime] = None,
    instrument_id: Optional[str] = None,
) -> float:
    """Recent predictive relevance of one source, in [0, 1].

    Pairs each observation value with the instrument's next-period
    absolute log return (both already realized by `end`), keeps the last
    `window` pairs and returns the absolute Pearson correlation; a
    constant series on either side scores 0. Bar and observation history
    outside [start, end] is ignored, which keeps the measure free of
    look-ahead when `end` is the current tick.
    """
    if window < 2:
        raise ValueError(f"window must be >= 2, got {window!r}")
    observations = store.query_observations(
        source_id,
        start=start,
        end=end + timedelta(milliseconds=1) if end is not None else None,
        instrument_id=instrument_id,
    )
    # observations are (timestamp, instrument)-ordered; walk backwards and
    # keep the most recent `window` pairs whose next-period return is
    # already realized by `end`
    bars_cache: dict[str, tuple[list, list]] = {}
    reversed_pairs: list[tuple[float, float]] = []
    for obs in reversed(observations):
        if obs.instrument_id not in bars_cache:
            if end is not None:
                bars = store.query_window(obs.instrument_id, end, 10**9)
            else:
                bars = store.query_bars(obs.instrument_id, _dt_min(), _dt_max())
            if start is not None:
                bars = [b for b in bars if b.timestamp >= start]
            bars_cache[obs.instrument_id] = ([b.timestamp for b in bars], [b.close for b in bars])
        stamps, closes = bars_cache[obs.instrument_id]
        idx = _rightmost_at_or_before(stamps, obs.timestamp)
        if idx is None or idx + 1 >= len(stamps):
            continue
        abs_ret = abs(math.log(closes[idx + 1] / closes[idx]))
        reversed_pairs.append((obs.value, abs_ret))
        if len(reversed_pairs) == window:
            break
    if len(reversed_pairs) < 2:
        raise InsufficientHistory(
            f"source {source_id!r} has {len(reversed_pairs)} usable points, need at least 2"
        )
    pairs = reversed_pairs[::-1]
    values = np.asarray([p[0] for p in pairs], dtype=np.float64)
    abs_rets = np.asarray([p[1] for p in pairs], dtype=np.float64)
    return kernels.abs_pearson(values, abs_rets)


def _rightmost_at_or_before(stamps: list[datetime], when: datetime) -> Optional[int]:
    pos = bisect.bisect_right(stamps, when)
    return pos - 1 if pos else None


def _dt_min() -> datetime:
    return datetime(1, 1, 2, tzinfo=timezone.utc)


def _dt_max() -> datetime:
    return datetime(9999, 12, 30, tzinfo=timezone.utc)
