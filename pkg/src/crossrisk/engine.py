"""The per-tick evaluation loop shared by monitor and backtest.

Each tick (one bar date after warm-up) runs the same pipeline:

  1. per-instrument log-return signals -> weighted aggregate signal
  2. rolling volatility and covariance over the trailing window -> risk r
  3. news batch since the previous tick -> text insight -> context -> r_total
  4. source observations -> integrated snapshots; relevance -> weight update
  5. signal normalization scales from trailing aggregate-signal history
  6. reliability, directional view, and (post-calibration) the alert gate

Ticks are the intersection of per-instrument bar dates inside the
requested interval; every quantity at tick t uses only records with
timestamp <= t inside that interval, so replaying the same data always
reproduces the same outputs and future records cannot leak in. The first
`window` ticks calibrate the automatic risk trigger (90th percentile of
their r_total) and emit no alerts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Iterator, Mapping, Optional

import numpy as np

from . import kernels
from .analytics import (
    RiskParams,
    RiskValue,
    SignalSet,
    SignalWeights,
    aggregate_cov,
    aggregate_signal,
    aggregate_v,
    covariance_matrix,
    risk_metric,
    rolling_volatility,
)
from .errors import InsufficientHistory, InsufficientWarmup
from .fusion import (
    IntegratedSnapshot,
    IntegrationWeights,
    initial_weights,
    integrate,
    relevance_from_history,
    update_weights,
)
from .model import SeriesStore, SourceKind
from .synthesis import (
    Alert,
    MarketView,
    TotalRisk,
    gate_alert,
    reliability_score,
    synthesize_view,
    total_risk,
)
from .textinsight import ProviderSpec, TextInsight, analyze_batch, context_adjustment

# Degenerate-scale guards for flat aggregate-signal history.
NORM_SCALE_FLOOR = 1e-8
RECENT_VOL_FLOOR = 1e-12

_MS = timedelta(milliseconds=1)


@dataclass(frozen=True)
class EngineParams:
    beta1: float = 1.0
    beta2: float = 1.0
    window: int = 30
    kappa: float = 0.5
    alpha: float = 0.6
    threshold: float = 0.75
    risk_trigger: Optional[float] = None  # None = calibrate from warm-up r_total
    flat_band: float = 0.05
    learning_rate: float = 0.05
    weight_floor: float = 0.01
    norm_scale_multiple: float = 3.0
    event_threshold_sigmas: float = 2.0

    def __post_init__(self):
        if self.beta1 < 0 or self.beta2 < 0:
            raise ValueError("beta1 and beta2 must be >= 0")
        if self.window < 2:
            raise ValueError("window must be >= 2")
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError("alpha must lie in [0, 1]")
        if not (0.0 <= self.threshold <= 1.0):
            raise ValueError("threshold must lie in [0, 1]")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.flat_band < 0:
            raise ValueError("flat_band must be >= 0")
        if not (0.0 < self.weight_floor < 1.0):
            raise ValueError("weight_floor must lie in (0, 1)")
        if self.norm_scale_multiple <= 0:
            raise ValueError("norm_scale_multiple must be > 0")
        if self.event_threshold_sigmas <= 0:
            raise ValueError("event_threshold_sigmas must be > 0")

    def risk_params(self) -> RiskParams:
        return RiskParams(beta1=self.beta1, beta2=self.beta2, window=self.window)


@dataclass
class PreparedData:
    """Aligned bar data for one run: the engine's read-only view."""

    ticks: list[datetime]
    universe: list[str]
    closes: dict[str, list[float]]
    rets: dict[str, list[float]]  # rets[j][i-1] = log return into tick i


def prepare(store: SeriesStore, universe, start: datetime, end: datetime) -> PreparedData:
    """Align per-instrument bars on their common dates inside [start, end)."""
    ids = sorted(universe)
    if not ids:
        raise ValueError("universe must not be empty")
    per_inst: dict[str, dict[datetime, float]] = {}
    common: Optional[set[datetime]] = None
    for inst in ids:
        bars = store.query_bars(inst, start, end)  # raises UnknownInstrument
        per_inst[inst] = {b.timestamp: b.close for b in bars}
        stamps = set(per_inst[inst])
        common = stamps if common is None else common & stamps
    ticks = sorted(common or ())
    closes = {inst: [per_inst[inst][t] for t in ticks] for inst in ids}
    rets = {
        inst: [math.log(series[i] / series[i - 1]) for i in range(1, len(series))]
        for inst, series in closes.items()
    }
    return PreparedData(ticks=ticks, universe=ids, closes=closes, rets=rets)


@dataclass
class TickResult:
    index: int
    timestamp: datetime
    phase: str  # "calibration" | "scored"
    m_t: float
    signals: SignalSet
    vols: dict[str, float]
    risk: RiskValue
    insight: TextInsight
    context: float
    total: TotalRisk
    view: MarketView
    alert: Optional[Alert]
    weights: dict[str, float]
    integrated: dict[str, IntegratedSnapshot]
    norm_scale: float
    recent_vol: float
    risk_trigger: Optional[float]


class TickEngine:
    """Runs the evaluation pipeline over prepared bar data.

    Alerts are suppressed during the calibration phase (the first
    `window` evaluation ticks) while the automatic risk trigger is being
    estimated; an explicitly configured trigger keeps the same phasing so
    every run follows one protocol.
    """

    def __init__(
        self,
        store: SeriesStore,
        data: PreparedData,
        sources: Optional[Mapping[str, SourceKind]] = None,
        params: EngineParams = EngineParams(),
        provider: ProviderSpec = ProviderSpec(),
        signal_weights: Optional[SignalWeights] = None,
    ):
        self.store = store.snapshot()  # isolate the run from concurrent appends
        self.data = data
        self.sources = dict(sorted((sources or {}).items()))
        self.params = params
        self.provider = provider
        self.signal_weights = signal_weights or SignalWeights.uniform(data.universe)
        self.weights: Optional[IntegrationWeights] = (
            initial_weights(self.sources, floor=params.weight_floor) if self.sources else None
        )

    def run(self) -> Iterator[TickResult]:
        p = self.params
        w = p.window
        ticks = self.data.ticks
        n = len(ticks)
        if n < w + 1:
            raise InsufficientWarmup(
                f"need at least {w + 1} aligned bars for a {w}-bar window, got {n}"
            )
        universe = self.data.universe
        rets = self.data.rets
        interval_start = ticks[0]
        m_history: list[float] = []
        calibration_totals: list[float] = []
        trigger = p.risk_trigger

        for i in range(w, n):
            t = ticks[i]
            prev_t = ticks[i - 1]

            signals = SignalSet(values={j: rets[j][i - 1] for j in universe})
            m_t = aggregate_signal(signals, self.signal_weights)

            window_rets = {j: rets[j][i - w : i] for j in universe}
            vols = {j: rolling_volatility(window_rets[j], w) for j in universe}
            v_term = aggregate_v(vols, self.signal_weights)
            if len(universe) >= 2:
                cov_term = aggregate_cov(covariance_matrix(window_rets))
            else:
                cov_term = 0.0  # co-movement undefined for a single instrument
            risk = risk_metric(v_term, cov_term, p.risk_params(), timestamp=t)

            docs = self.store.query_news(prev_t + _MS, t + _MS)
            insight = analyze_batch(docs, self.provider, timestamp=t)
            context = context_adjustment(risk, insight, p.kappa)
            total = total_risk(risk, context, timestamp=t)

            integrated = self._integrate_tick(prev_t, t)
            if self.weights is not None:
                relevance = self._relevance_tick(interval_start, t)
                self.weights = update_weights(self.weights, relevance, p.learning_rate)

            m_history.append(m_t)
            tail = m_history[-w:]
            spread = kernels.sample_std(np.asarray(tail)) if len(tail) >= 2 else 0.0
            norm_scale = max(p.norm_scale_multiple * spread, NORM_SCALE_FLOOR)
            recent_vol = max(spread, RECENT_VOL_FLOOR)

            reliability = reliability_score(m_t, recent_vol, insight, p.flat_band)
            view = synthesize_view(
                m_t,
                insight,
                norm_scale,
                alpha=p.alpha,
                reliability=reliability,
                flat_band=p.flat_band,
                timestamp=t,
            )

            alert = None
            if i < 2 * w:
                phase = "calibration"
                calibration_totals.append(total.r_total)
            else:
                phase = "scored"
                if trigger is None:
                    trigger = float(np.percentile(calibration_totals, 90.0))
                alert = gate_alert(
                    view,
                    total,
                    threshold=p.threshold,
                    risk_trigger=trigger,
                    scope=tuple(universe),
                    insight=insight,
                )

            yield TickResult(
                index=i,
                timestamp=t,
                phase=phase,
                m_t=m_t,
                signals=signals,
                vols=vols,
                risk=risk,
                insight=insight,
                context=context,
                total=total,
                view=view,
                alert=alert,
                weights=dict(self.weights.weights) if self.weights is not None else {},
                integrated=integrated,
                norm_scale=norm_scale,
                recent_vol=recent_vol,
                risk_trigger=trigger,
            )

    def _integrate_tick(self, prev_t: datetime, t: datetime) -> dict[str, IntegratedSnapshot]:
        if self.weights is None:
            return {}
        per_instrument: dict[str, dict[str, float]] = {}
        for source_id in self.sources:
            for obs in self.store.query_observations(source_id, start=prev_t + _MS, end=t + _MS):
                if obs.instrument_id not in self.data.closes:
                    continue
                # latest value wins within the tick (observations are ordered)
                per_instrument.setdefault(obs.instrument_id, {})[source_id] = obs.value
        return {
            inst: integrate(values, self.weights, t, inst)
            for inst, values in sorted(per_instrument.items())
        }

    def _relevance_tick(self, start: datetime, t: datetime) -> dict[str, float]:
        relevance: dict[str, float] = {}
        for source_id in self.sources:
            try:
                relevance[source_id] = relevance_from_history(
                    self.store, source_id, window=self.params.window, end=t, start=start
                )
            except InsufficientHistory:
                relevance[source_id] = 0.0
        return relevance
